/*
 * C interface to the plrs library: the Ruijsenaars-Schneider system obtained by Poisson-Lie
 * reduction of free motion on the Heisenberg double of U(n).
 *
 * All objects are opaque handles created and destroyed by the library. Every fallible call
 * returns a plrs_status; on failure a thread-local message is available from
 * plrs_last_error(). Matrices cross the boundary as row-major n*n arrays of real and
 * imaginary parts.
 */
#ifndef PLRS_PLRS_H
#define PLRS_PLRS_H

#include <stddef.h>
#include <stdint.h>

#if defined(PLRS_BUILDING_LIBRARY)
#define PLRS_API __attribute__((visibility("default")))
#else
#define PLRS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum plrs_status {
    PLRS_OK = 0,
    PLRS_ERR_INVALID_ARGUMENT = 1,
    PLRS_ERR_NOT_HERMITIAN = 2,
    PLRS_ERR_NOT_POSITIVE_DEFINITE = 3,
    PLRS_ERR_NOT_UNITARY = 4,
    PLRS_ERR_SINGULAR = 5,
    PLRS_ERR_NO_CONVERGENCE = 6,
    PLRS_ERR_DEGENERATE_ALCOVE = 7,
    PLRS_ERR_CONSTRAINT_VIOLATED = 8,
    PLRS_ERR_STEP_UNSTABLE = 9,
    PLRS_ERR_INTERNAL = 99
} plrs_status;

typedef enum plrs_engine {
    PLRS_ENGINE_DOUBLE = 0,
    PLRS_ENGINE_PROJECTION = 1,
    PLRS_ENGINE_ODE = 2
} plrs_engine;

typedef enum plrs_mutation {
    PLRS_MUTATION_NONE = 0,
    PLRS_MUTATION_ZETA_HALF = 1,
    PLRS_MUTATION_ZETA_FLIPPED_SIGNS = 2,
    PLRS_MUTATION_NU_PERTURBED = 3
} plrs_mutation;

typedef struct plrs_ode_settings {
    double step;
    double gradient_step;
} plrs_ode_settings;

/* n, x, weights mu_j and (optionally) a phase point (q, p). */
typedef struct plrs_system plrs_system;
typedef struct plrs_trajectory plrs_trajectory;
typedef struct plrs_report plrs_report;

PLRS_API const char* plrs_version(void);
PLRS_API const char* plrs_status_string(plrs_status status);
/* Message of the most recent failure on the calling thread; empty if none. */
PLRS_API const char* plrs_last_error(void);

PLRS_API plrs_ode_settings plrs_ode_settings_default(void);

/* ---- system ---- */
/* New systems carry the RS weights mu = {1: 1, -1: -1}. */
PLRS_API plrs_status plrs_system_create(int n, double x, plrs_system** out);
PLRS_API void plrs_system_destroy(plrs_system* sys);
PLRS_API int plrs_system_dim(const plrs_system* sys);
/* Replaces the weights; powers must be non-zero. count == 0 clears them. */
PLRS_API plrs_status plrs_system_set_mu(plrs_system* sys, const int* powers, const double* weights, size_t count);
/* q must lie in the alcove pi > q_1 > ... > q_n >= 0. */
PLRS_API plrs_status plrs_system_set_state(plrs_system* sys, const double* q, const double* p);

/* ---- constants and Lax matrices (outputs sized n*n or n) ---- */
PLRS_API plrs_status plrs_nu(const plrs_system* sys, double* re, double* im);
PLRS_API plrs_status plrs_kks_vector(const plrs_system* sys, double* out);
PLRS_API plrs_status plrs_n_matrix(const plrs_system* sys, double* re, double* im);
PLRS_API plrs_status plrs_lax(const plrs_system* sys, double* re, double* im);
PLRS_API plrs_status plrs_rs_lax(const plrs_system* sys, double* re, double* im);
PLRS_API plrs_status plrs_rs_hamiltonian(const plrs_system* sys, double* out);
PLRS_API plrs_status plrs_reduced_hamiltonian(const plrs_system* sys, double* out);
/* Moment map residual ||Lambda(K) - nu(x)||_F of the slice point of the current state. */
PLRS_API plrs_status plrs_slice_constraint_residual(const plrs_system* sys, double* out);

/* ---- trajectories ---- */
/* times: strictly increasing, times[0] == 0. settings may be NULL (defaults); only the ODE
 * engine reads it. A trajectory that stopped early is still returned with PLRS_OK; query
 * plrs_trajectory_truncated. */
PLRS_API plrs_status plrs_simulate(const plrs_system* sys, plrs_engine engine, const double* times, size_t count,
                                   const plrs_ode_settings* settings, plrs_trajectory** out);
PLRS_API void plrs_trajectory_destroy(plrs_trajectory* traj);
PLRS_API size_t plrs_trajectory_length(const plrs_trajectory* traj);
PLRS_API int plrs_trajectory_dim(const plrs_trajectory* traj);
PLRS_API plrs_engine plrs_trajectory_engine(const plrs_trajectory* traj);
PLRS_API int plrs_trajectory_has_momenta(const plrs_trajectory* traj);
PLRS_API int plrs_trajectory_has_energy(const plrs_trajectory* traj);
PLRS_API int plrs_trajectory_has_constraint_residual(const plrs_trajectory* traj);
PLRS_API double plrs_trajectory_time(const plrs_trajectory* traj, size_t i);
PLRS_API plrs_status plrs_trajectory_q(const plrs_trajectory* traj, size_t i, double* out);
PLRS_API plrs_status plrs_trajectory_p(const plrs_trajectory* traj, size_t i, double* out);
PLRS_API plrs_status plrs_trajectory_lax_spectrum(const plrs_trajectory* traj, size_t i, double* out);
PLRS_API double plrs_trajectory_energy(const plrs_trajectory* traj, size_t i);
PLRS_API double plrs_trajectory_constraint_residual(const plrs_trajectory* traj, size_t i);
PLRS_API int plrs_trajectory_truncated(const plrs_trajectory* traj);
/* Status and time of the failure that truncated the trajectory (PLRS_OK if complete). */
PLRS_API plrs_status plrs_trajectory_failure(const plrs_trajectory* traj, double* time, const char** message);
/* Max relative deviation of the stored RS Lax spectra from the first sample. */
PLRS_API plrs_status plrs_trajectory_spectrum_drift(const plrs_trajectory* traj, double* out);

/* ---- verification ---- */
PLRS_API plrs_status plrs_verify(int n_max, uint64_t seed, int strict, plrs_mutation mutation, plrs_report** out);
/* criterion in 1..9; 9 runs the mutation-sensitivity checks. */
PLRS_API plrs_status plrs_verify_criterion(int criterion, int n_max, uint64_t seed, plrs_report** out);
PLRS_API void plrs_report_destroy(plrs_report* report);
PLRS_API size_t plrs_report_count(const plrs_report* report);
PLRS_API int plrs_report_all_passed(const plrs_report* report);
PLRS_API plrs_status plrs_report_entry(const plrs_report* report, size_t i, const char** module, const char** name,
                                       int* criterion, double* worst, double* tolerance, size_t* samples,
                                       int* passed);

#ifdef __cplusplus
}
#endif

#endif /* PLRS_PLRS_H */
