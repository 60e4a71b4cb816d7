#pragma once

#include "plrs/errors.hpp"
#include "plrs/reduction.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace plrs::dynamics {

enum class Engine { double_flow, projection, ode };

const char* to_string(Engine engine) noexcept;

/// Why and where an engine stopped early.
struct Failure {
    double time = 0.0;
    ErrorCode code = ErrorCode::degenerate_alcove;
    std::string message;
};

/// Time samples of the reduced system. The projection engine determines positions only: its
/// `p` is empty and its `energy` and `lax_spectrum` repeat the invariants of the seed Lax
/// matrix, which that method carries exactly. `constraint_residual` is filled by the double
/// engine only. A set `failure` means the samples stop before the requested end.
struct Trajectory {
    Engine engine = Engine::double_flow;
    std::vector<double> times;
    std::vector<RVector> q;
    std::vector<RVector> p;
    std::vector<double> energy;
    std::vector<RVector> lax_spectrum;
    std::vector<double> constraint_residual;
    std::optional<Failure> failure;

    std::size_t size() const noexcept { return times.size(); }
    bool truncated() const noexcept { return failure.has_value(); }
    bool has_momenta() const noexcept { return engine != Engine::projection; }
};

struct OdeSettings {
    double step = 1e-3;
    double gradient_step = 1e-6;

    void validate() const;
};

/// Which Lax matrix seeds the projection geodesic; both give the same eigenvalues.
enum class ProjectionSeed { rs_lax, reduced_lax };

/// Closed-form free flow on the double started on the slice, mapped back by decompose_to_slice.
Trajectory flow_via_double(const PhasePoint& start, Coupling x, const MuWeights& mu, std::span<const double> times,
                           const Tolerances& tol = {});

/// Positions as the ordered eigenangles of T(0) exp(i t sum_j mu_j Lax(0)^j), halved.
Trajectory flow_via_projection(const PhasePoint& start, Coupling x, const MuWeights& mu,
                               std::span<const double> times, const Tolerances& tol = {},
                               ProjectionSeed seed = ProjectionSeed::rs_lax);

/// Fixed-step RK4 on Hamilton's equations with central-difference gradients of the reduced Hamiltonian.
Trajectory flow_via_ode(const PhasePoint& start, Coupling x, const MuWeights& mu, std::span<const double> times,
                        const OdeSettings& settings = {}, const Tolerances& tol = {});

using PhaseFunction = std::function<double(const PhasePoint&)>;

/// sum_k (dF/dq_k dG/dp_k - dF/dp_k dG/dq_k) by fourth-order central differences.
double poisson_bracket(const PhaseFunction& f, const PhaseFunction& g, const PhasePoint& at,
                       double gradient_step = 1e-4, const Tolerances& tol = {});

/// max_t max_i |lambda_i(t) - lambda_i(0)| / max(1, |lambda_i(0)|) over the stored Lax spectra.
double spectrum_drift(const Trajectory& traj);

/// Sorted eigenvalues of the RS Lax matrix at a phase point.
RVector lax_spectrum(const PhasePoint& point, Coupling x, const Tolerances& tol = {});

} // namespace plrs::dynamics
