#include "plrs/plrs.h"

#include "plrs/dynamics.hpp"
#include "plrs/errors.hpp"
#include "plrs/heisenberg.hpp"
#include "plrs/reduction.hpp"
#include "plrs/verify.hpp"

#include <optional>
#include <string>
#include <vector>

using namespace plrs;

struct plrs_system {
    int n;
    Coupling x;
    MuWeights mu;
    std::optional<PhasePoint> state;
    Tolerances tol;
};

struct plrs_trajectory {
    dynamics::Trajectory traj;
    int n;
};

struct plrs_report {
    verify::Report report;
};

namespace {

thread_local std::string last_error;

plrs_status to_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::invalid_argument: return PLRS_ERR_INVALID_ARGUMENT;
    case ErrorCode::not_hermitian: return PLRS_ERR_NOT_HERMITIAN;
    case ErrorCode::not_positive_definite: return PLRS_ERR_NOT_POSITIVE_DEFINITE;
    case ErrorCode::not_unitary: return PLRS_ERR_NOT_UNITARY;
    case ErrorCode::singular: return PLRS_ERR_SINGULAR;
    case ErrorCode::no_convergence: return PLRS_ERR_NO_CONVERGENCE;
    case ErrorCode::degenerate_alcove: return PLRS_ERR_DEGENERATE_ALCOVE;
    case ErrorCode::constraint_violated: return PLRS_ERR_CONSTRAINT_VIOLATED;
    case ErrorCode::step_unstable: return PLRS_ERR_STEP_UNSTABLE;
    }
    return PLRS_ERR_INTERNAL;
}

template <class F>
plrs_status guarded(F&& body) {
    try {
        body();
        last_error.clear();
        return PLRS_OK;
    } catch (const Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::exception& e) {
        last_error = e.what();
        return PLRS_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown exception";
        return PLRS_ERR_INTERNAL;
    }
}

void require(bool condition, const char* message) {
    if (!condition) {
        throw Error(ErrorCode::invalid_argument, message);
    }
}

const PhasePoint& state_of(const plrs_system* sys) {
    require(sys != nullptr, "null system handle");
    if (!sys->state) {
        throw Error(ErrorCode::invalid_argument, "system has no phase point; call plrs_system_set_state first");
    }
    return *sys->state;
}

void write_matrix(const CMatrix& m, double* re, double* im) {
    require(re != nullptr && im != nullptr, "null output buffer");
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            re[i * m.cols() + j] = m(i, j).real();
            im[i * m.cols() + j] = m(i, j).imag();
        }
    }
}

void write_vector(const RVector& v, double* out) {
    require(out != nullptr, "null output buffer");
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out[i] = v[i];
    }
}

verify::Mutation to_mutation(plrs_mutation m) {
    switch (m) {
    case PLRS_MUTATION_NONE: return verify::Mutation::none;
    case PLRS_MUTATION_ZETA_HALF: return verify::Mutation::zeta_half;
    case PLRS_MUTATION_ZETA_FLIPPED_SIGNS: return verify::Mutation::zeta_flipped_signs;
    case PLRS_MUTATION_NU_PERTURBED: return verify::Mutation::nu_perturbed;
    }
    throw Error(ErrorCode::invalid_argument, "unknown mutation");
}

} // namespace

extern "C" {

const char* plrs_version(void) {
    return "0.1.0";
}

const char* plrs_status_string(plrs_status status) {
    switch (status) {
    case PLRS_OK: return "Ok";
    case PLRS_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case PLRS_ERR_NOT_HERMITIAN: return "NotHermitian";
    case PLRS_ERR_NOT_POSITIVE_DEFINITE: return "NotPositiveDefinite";
    case PLRS_ERR_NOT_UNITARY: return "NotUnitary";
    case PLRS_ERR_SINGULAR: return "Singular";
    case PLRS_ERR_NO_CONVERGENCE: return "NoConvergence";
    case PLRS_ERR_DEGENERATE_ALCOVE: return "DegenerateAlcove";
    case PLRS_ERR_CONSTRAINT_VIOLATED: return "ConstraintViolated";
    case PLRS_ERR_STEP_UNSTABLE: return "StepUnstable";
    case PLRS_ERR_INTERNAL: return "Internal";
    }
    return "Unknown";
}

const char* plrs_last_error(void) {
    return last_error.c_str();
}

plrs_ode_settings plrs_ode_settings_default(void) {
    const dynamics::OdeSettings d;
    return {d.step, d.gradient_step};
}

plrs_status plrs_system_create(int n, double x, plrs_system** out) {
    return guarded([&] {
        require(out != nullptr, "null output handle");
        *out = nullptr;
        require(n >= 1, "n must be at least 1");
        *out = new plrs_system{n, Coupling(x), MuWeights{{1, 1.0}, {-1, -1.0}}, std::nullopt, {}};
    });
}

void plrs_system_destroy(plrs_system* sys) {
    delete sys;
}

int plrs_system_dim(const plrs_system* sys) {
    return sys ? sys->n : 0;
}

plrs_status plrs_system_set_mu(plrs_system* sys, const int* powers, const double* weights, size_t count) {
    return guarded([&] {
        require(sys != nullptr, "null system handle");
        require(count == 0 || (powers != nullptr && weights != nullptr), "null weight arrays");
        MuWeights mu;
        for (size_t i = 0; i < count; ++i) {
            mu.set(powers[i], weights[i]);
        }
        sys->mu = std::move(mu);
    });
}

plrs_status plrs_system_set_state(plrs_system* sys, const double* q, const double* p) {
    return guarded([&] {
        require(sys != nullptr, "null system handle");
        require(q != nullptr && p != nullptr, "null state arrays");
        const RVector qv = Eigen::Map<const RVector>(q, sys->n);
        const RVector pv = Eigen::Map<const RVector>(p, sys->n);
        sys->state = PhasePoint::from(qv, pv, sys->tol);
    });
}

plrs_status plrs_nu(const plrs_system* sys, double* re, double* im) {
    return guarded([&] {
        require(sys != nullptr, "null system handle");
        write_matrix(reduction::nu(sys->x, sys->n).mat(), re, im);
    });
}

plrs_status plrs_kks_vector(const plrs_system* sys, double* out) {
    return guarded([&] {
        require(sys != nullptr, "null system handle");
        write_vector(reduction::kks_vector(sys->x, sys->n), out);
    });
}

plrs_status plrs_n_matrix(const plrs_system* sys, double* re, double* im) {
    return guarded([&] { write_matrix(reduction::n_matrix(state_of(sys).alcove(), sys->x), re, im); });
}

plrs_status plrs_lax(const plrs_system* sys, double* re, double* im) {
    return guarded([&] { write_matrix(reduction::lax_reduced(state_of(sys), sys->x), re, im); });
}

plrs_status plrs_rs_lax(const plrs_system* sys, double* re, double* im) {
    return guarded([&] { write_matrix(reduction::rs_lax(state_of(sys), sys->x), re, im); });
}

plrs_status plrs_rs_hamiltonian(const plrs_system* sys, double* out) {
    return guarded([&] {
        const PhasePoint& pt = state_of(sys);
        require(out != nullptr, "null output");
        *out = reduction::rs_hamiltonian(pt, sys->x);
    });
}

plrs_status plrs_reduced_hamiltonian(const plrs_system* sys, double* out) {
    return guarded([&] {
        const PhasePoint& pt = state_of(sys);
        require(out != nullptr, "null output");
        *out = reduction::reduced_hamiltonian(pt, sys->x, sys->mu, sys->tol);
    });
}

plrs_status plrs_slice_constraint_residual(const plrs_system* sys, double* out) {
    return guarded([&] {
        const PhasePoint& pt = state_of(sys);
        require(out != nullptr, "null output");
        const DoublePoint k = reduction::slice_point(pt, sys->x, sys->tol);
        *out = (heisenberg::moment_map(k, sys->tol).mat() - reduction::nu(sys->x, sys->n).mat()).norm();
    });
}

plrs_status plrs_simulate(const plrs_system* sys, plrs_engine engine, const double* times, size_t count,
                          const plrs_ode_settings* settings, plrs_trajectory** out) {
    return guarded([&] {
        require(out != nullptr, "null output handle");
        *out = nullptr;
        const PhasePoint& start = state_of(sys);
        require(times != nullptr && count > 0, "empty time grid");
        const std::span<const double> grid(times, count);
        dynamics::Trajectory traj;
        switch (engine) {
        case PLRS_ENGINE_DOUBLE:
            traj = dynamics::flow_via_double(start, sys->x, sys->mu, grid, sys->tol);
            break;
        case PLRS_ENGINE_PROJECTION:
            traj = dynamics::flow_via_projection(start, sys->x, sys->mu, grid, sys->tol);
            break;
        case PLRS_ENGINE_ODE: {
            dynamics::OdeSettings ode;
            if (settings != nullptr) {
                ode.step = settings->step;
                ode.gradient_step = settings->gradient_step;
            }
            traj = dynamics::flow_via_ode(start, sys->x, sys->mu, grid, ode, sys->tol);
            break;
        }
        default:
            throw Error(ErrorCode::invalid_argument, "unknown engine");
        }
        *out = new plrs_trajectory{std::move(traj), sys->n};
    });
}

void plrs_trajectory_destroy(plrs_trajectory* traj) {
    delete traj;
}

size_t plrs_trajectory_length(const plrs_trajectory* traj) {
    return traj ? traj->traj.size() : 0;
}

int plrs_trajectory_dim(const plrs_trajectory* traj) {
    return traj ? traj->n : 0;
}

plrs_engine plrs_trajectory_engine(const plrs_trajectory* traj) {
    switch (traj->traj.engine) {
    case dynamics::Engine::double_flow: return PLRS_ENGINE_DOUBLE;
    case dynamics::Engine::projection: return PLRS_ENGINE_PROJECTION;
    case dynamics::Engine::ode: return PLRS_ENGINE_ODE;
    }
    return PLRS_ENGINE_DOUBLE;
}

int plrs_trajectory_has_momenta(const plrs_trajectory* traj) {
    return traj && traj->traj.has_momenta() ? 1 : 0;
}

int plrs_trajectory_has_energy(const plrs_trajectory* traj) {
    return traj && !traj->traj.energy.empty() ? 1 : 0;
}

int plrs_trajectory_has_constraint_residual(const plrs_trajectory* traj) {
    return traj && traj->traj.engine == dynamics::Engine::double_flow ? 1 : 0;
}

double plrs_trajectory_time(const plrs_trajectory* traj, size_t i) {
    return traj && i < traj->traj.times.size() ? traj->traj.times[i] : 0.0;
}

plrs_status plrs_trajectory_q(const plrs_trajectory* traj, size_t i, double* out) {
    return guarded([&] {
        require(traj != nullptr && i < traj->traj.q.size(), "sample index out of range");
        write_vector(traj->traj.q[i], out);
    });
}

plrs_status plrs_trajectory_p(const plrs_trajectory* traj, size_t i, double* out) {
    return guarded([&] {
        require(traj != nullptr && i < traj->traj.p.size(), "sample index out of range or no momenta");
        write_vector(traj->traj.p[i], out);
    });
}

plrs_status plrs_trajectory_lax_spectrum(const plrs_trajectory* traj, size_t i, double* out) {
    return guarded([&] {
        require(traj != nullptr && i < traj->traj.lax_spectrum.size(), "sample index out of range or no spectra");
        write_vector(traj->traj.lax_spectrum[i], out);
    });
}

double plrs_trajectory_energy(const plrs_trajectory* traj, size_t i) {
    return traj && i < traj->traj.energy.size() ? traj->traj.energy[i] : 0.0;
}

double plrs_trajectory_constraint_residual(const plrs_trajectory* traj, size_t i) {
    return traj && i < traj->traj.constraint_residual.size() ? traj->traj.constraint_residual[i] : 0.0;
}

int plrs_trajectory_truncated(const plrs_trajectory* traj) {
    return traj && traj->traj.truncated() ? 1 : 0;
}

plrs_status plrs_trajectory_failure(const plrs_trajectory* traj, double* time, const char** message) {
    if (traj == nullptr || !traj->traj.failure) {
        if (time) {
            *time = 0.0;
        }
        if (message) {
            *message = "";
        }
        return PLRS_OK;
    }
    const auto& f = *traj->traj.failure;
    if (time) {
        *time = f.time;
    }
    if (message) {
        *message = f.message.c_str();
    }
    return to_status(f.code);
}

plrs_status plrs_trajectory_spectrum_drift(const plrs_trajectory* traj, double* out) {
    return guarded([&] {
        require(traj != nullptr && out != nullptr, "null argument");
        *out = dynamics::spectrum_drift(traj->traj);
    });
}

plrs_status plrs_verify(int n_max, uint64_t seed, int strict, plrs_mutation mutation, plrs_report** out) {
    return guarded([&] {
        require(out != nullptr, "null output handle");
        *out = nullptr;
        verify::Options options{n_max, seed, strict != 0, to_mutation(mutation)};
        *out = new plrs_report{verify::run_suite(options)};
    });
}

plrs_status plrs_verify_criterion(int criterion, int n_max, uint64_t seed, plrs_report** out) {
    return guarded([&] {
        require(out != nullptr, "null output handle");
        *out = nullptr;
        verify::Options options{n_max, seed, false, verify::Mutation::none};
        *out = new plrs_report{criterion == 9 ? verify::run_mutation_checks(options)
                                              : verify::run_criterion(criterion, options)};
    });
}

void plrs_report_destroy(plrs_report* report) {
    delete report;
}

size_t plrs_report_count(const plrs_report* report) {
    return report ? report->report.results.size() : 0;
}

int plrs_report_all_passed(const plrs_report* report) {
    return report && report->report.all_passed() ? 1 : 0;
}

plrs_status plrs_report_entry(const plrs_report* report, size_t i, const char** module, const char** name,
                              int* criterion, double* worst, double* tolerance, size_t* samples, int* passed) {
    return guarded([&] {
        require(report != nullptr && i < report->report.results.size(), "report index out of range");
        const auto& r = report->report.results[i];
        if (module) *module = r.module.c_str();
        if (name) *name = r.name.c_str();
        if (criterion) *criterion = r.criterion;
        if (worst) *worst = r.worst;
        if (tolerance) *tolerance = r.tolerance;
        if (samples) *samples = r.samples;
        if (passed) *passed = r.passed ? 1 : 0;
    });
}

} // extern "C"
