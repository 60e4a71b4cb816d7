#include "plrs/dynamics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace plrs::dynamics {

namespace {

void validate_times(std::span<const double> times) {
    if (times.empty()) {
        throw Error(ErrorCode::invalid_argument, "times: at least one sample is required");
    }
    if (times[0] != 0.0) {
        throw Error(ErrorCode::invalid_argument, "times: the first sample must be t = 0");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!std::isfinite(times[i]) || !(times[i] > times[i - 1])) {
            throw Error(ErrorCode::invalid_argument, "times: samples must be finite and strictly increasing");
        }
    }
}

Failure failure_from(double t, const Error& e) {
    return {t, e.code(), e.what()};
}

} // namespace

const char* to_string(Engine engine) noexcept {
    switch (engine) {
    case Engine::double_flow: return "double";
    case Engine::projection: return "projection";
    case Engine::ode: return "ode";
    }
    return "unknown";
}

void OdeSettings::validate() const {
    if (!(step > 0.0) || !(gradient_step > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "ode settings: step and gradient_step must be positive");
    }
}

RVector lax_spectrum(const PhasePoint& point, Coupling x, const Tolerances& tol) {
    const CMatrix l = reduction::rs_lax(point, x);
    return matcore::hermitian_eigenvalues((l + l.adjoint()) * 0.5, tol);
}

Trajectory flow_via_double(const PhasePoint& start, Coupling x, const MuWeights& mu, std::span<const double> times,
                           const Tolerances& tol) {
    validate_times(times);
    const int n = static_cast<int>(start.size());
    const CMatrix target = reduction::nu(x, n).mat();
    const DoublePoint k0 = reduction::slice_point(start, x, tol);

    Trajectory traj;
    traj.engine = Engine::double_flow;
    for (const double t : times) {
        try {
            const DoublePoint kt = heisenberg::free_flow(k0, mu, t, tol);
            const double residual = (heisenberg::moment_map(kt, tol).mat() - target).norm();
            const PhasePoint point = reduction::decompose_to_slice(kt, x, tol).point;
            traj.energy.push_back(reduction::reduced_hamiltonian(point, x, mu, tol));
            traj.lax_spectrum.push_back(lax_spectrum(point, x, tol));
            traj.constraint_residual.push_back(residual);
            traj.q.push_back(point.q());
            traj.p.push_back(point.p());
            traj.times.push_back(t);
        } catch (const Error& e) {
            traj.failure = failure_from(t, e);
            break;
        }
    }
    return traj;
}

Trajectory flow_via_projection(const PhasePoint& start, Coupling x, const MuWeights& mu,
                               std::span<const double> times, const Tolerances& tol, ProjectionSeed seed) {
    validate_times(times);
    const CMatrix lax0 = seed == ProjectionSeed::rs_lax ? reduction::rs_lax(start, x) : reduction::lax_reduced(start, x);
    Eigen::SelfAdjointEigenSolver<CMatrix> solver((lax0 + lax0.adjoint()) * 0.5);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::no_convergence, "flow_via_projection: eigensolver failed");
    }
    const RVector& lambda = solver.eigenvalues();
    const CMatrix& v = solver.eigenvectors();
    // sum_j mu_j lambda^j == flow_generator(1 / lambda)
    RVector generator(lambda.size());
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        generator[k] = mu.flow_generator(1.0 / lambda[k]);
    }
    const CMatrix t0 = start.alcove().torus().mat();
    double energy = 0.0;
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        energy += mu.hamiltonian_density(lambda[k]);
    }

    auto eigen_at = [&](double t) {
        CVector phases(lambda.size());
        for (Eigen::Index k = 0; k < lambda.size(); ++k) {
            phases[k] = std::polar(1.0, t * generator[k]);
        }
        auto eig = matcore::unitary_eig(UnitaryMatrix::from(t0 * v * phases.asDiagonal() * v.adjoint(), tol), tol);
        if (eig.degenerate) {
            throw Error(ErrorCode::degenerate_alcove, "flow_via_projection: eigenvalue collision");
        }
        return eig;
    };

    Trajectory traj;
    traj.engine = Engine::projection;
    for (const double t : times) {
        try {
            // Sorting into the alcove fixes the labels; regularity of T(t) keeps them continuous.
            const auto eig = eigen_at(t);
            traj.q.push_back(AlcovePoint::from(eig.angles / 2.0, tol).q());
            traj.energy.push_back(energy);
            traj.lax_spectrum.push_back(lambda);
            traj.times.push_back(t);
        } catch (const Error& e) {
            traj.failure = failure_from(t, e);
            break;
        }
    }
    return traj;
}

namespace {

struct OdeState {
    RVector q;
    RVector p;
};

class OdeSystem {
public:
    OdeSystem(Coupling x, const MuWeights& mu, double gradient_step, const Tolerances& tol)
        : x_(x), mu_(mu), h_(gradient_step), tol_(tol) {}

    double energy(const RVector& q, const RVector& p) const {
        return reduction::reduced_hamiltonian(reduction::to_alcove(q, p, tol_), x_, mu_, tol_);
    }

    OdeState rhs(const OdeState& s) const {
        const Eigen::Index n = s.q.size();
        OdeState d{RVector(n), RVector(n)};
        for (Eigen::Index k = 0; k < n; ++k) {
            RVector qp = s.q, qm = s.q;
            qp[k] += h_;
            qm[k] -= h_;
            d.p[k] = -(energy(qp, s.p) - energy(qm, s.p)) / (2.0 * h_);
            RVector pp = s.p, pm = s.p;
            pp[k] += h_;
            pm[k] -= h_;
            d.q[k] = (energy(s.q, pp) - energy(s.q, pm)) / (2.0 * h_);
        }
        return d;
    }

    OdeState rk4(const OdeState& s, double dt) const {
        const OdeState k1 = rhs(s);
        const OdeState k2 = rhs({s.q + 0.5 * dt * k1.q, s.p + 0.5 * dt * k1.p});
        const OdeState k3 = rhs({s.q + 0.5 * dt * k2.q, s.p + 0.5 * dt * k2.p});
        const OdeState k4 = rhs({s.q + dt * k3.q, s.p + dt * k3.p});
        return {s.q + dt / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q),
                s.p + dt / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p)};
    }

private:
    Coupling x_;
    const MuWeights& mu_;
    double h_;
    Tolerances tol_;
};

constexpr double unstable_energy_drift = 1e-3;

} // namespace

Trajectory flow_via_ode(const PhasePoint& start, Coupling x, const MuWeights& mu, std::span<const double> times,
                        const OdeSettings& settings, const Tolerances& tol) {
    validate_times(times);
    settings.validate();
    const OdeSystem system(x, mu, settings.gradient_step, tol);

    Trajectory traj;
    traj.engine = Engine::ode;
    OdeState state{start.q(), start.p()};
    const double e0 = reduction::reduced_hamiltonian(start, x, mu, tol);
    double now = 0.0;
    for (const double t : times) {
        try {
            while (now < t) {
                const double remaining = t - now;
                // Absorb a tail shorter than a rounding error into the current step.
                const double dt = remaining <= settings.step * (1.0 + 1e-9) ? remaining : settings.step;
                try {
                    state = system.rk4(state, dt);
                } catch (const Error& e) {
                    // Stages that leave the phase space mean the step outran the dynamics.
                    throw Error(ErrorCode::step_unstable, std::string("flow_via_ode: integrator diverged (") + e.what() + ")");
                }
                if (!state.q.allFinite() || !state.p.allFinite()) {
                    throw Error(ErrorCode::step_unstable, "flow_via_ode: integrator produced a non-finite state");
                }
                now = dt == remaining ? t : now + dt;
            }
            const PhasePoint point = reduction::to_alcove(state.q, state.p, tol);
            const double e = reduction::reduced_hamiltonian(point, x, mu, tol);
            if (std::abs(e - e0) > unstable_energy_drift * std::max(1.0, std::abs(e0))) {
                std::ostringstream msg;
                msg << "flow_via_ode: energy drift " << std::abs(e - e0) << " exceeds " << unstable_energy_drift;
                throw Error(ErrorCode::step_unstable, msg.str());
            }
            traj.energy.push_back(e);
            traj.lax_spectrum.push_back(lax_spectrum(point, x, tol));
            traj.q.push_back(point.q());
            traj.p.push_back(point.p());
            traj.times.push_back(t);
        } catch (const Error& e) {
            traj.failure = failure_from(t, e);
            break;
        }
    }
    return traj;
}

double poisson_bracket(const PhaseFunction& f, const PhaseFunction& g, const PhasePoint& at, double gradient_step,
                       const Tolerances& tol) {
    if (!(gradient_step > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "poisson_bracket: gradient_step must be positive");
    }
    const double margin = 10.0 * gradient_step;
    const RVector& q = at.q();
    if (at.alcove().min_gap() <= margin || q[q.size() - 1] <= margin || q[0] >= std::numbers::pi - margin) {
        throw Error(ErrorCode::degenerate_alcove, "poisson_bracket: point too close to a collision or the alcove boundary");
    }
    const double h = gradient_step;
    auto shifted = [&](const PhaseFunction& fn, Eigen::Index k, bool momentum, double by) {
        RVector qs = at.q(), ps = at.p();
        (momentum ? ps : qs)[k] += by;
        return fn(PhasePoint::from(qs, ps, tol));
    };
    // Five-point central stencil, fourth order in h.
    auto partial = [&](const PhaseFunction& fn, Eigen::Index k, bool momentum) {
        const double d1 = shifted(fn, k, momentum, h) - shifted(fn, k, momentum, -h);
        const double d2 = shifted(fn, k, momentum, 2.0 * h) - shifted(fn, k, momentum, -2.0 * h);
        return (8.0 * d1 - d2) / (12.0 * h);
    };
    const Eigen::Index n = at.size();
    double bracket = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        bracket += partial(f, k, false) * partial(g, k, true) - partial(f, k, true) * partial(g, k, false);
    }
    return bracket;
}

double spectrum_drift(const Trajectory& traj) {
    if (traj.lax_spectrum.size() < 2) {
        return 0.0;
    }
    const RVector& first = traj.lax_spectrum.front();
    double drift = 0.0;
    for (const RVector& s : traj.lax_spectrum) {
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            drift = std::max(drift, std::abs(s[i] - first[i]) / std::max(1.0, std::abs(first[i])));
        }
    }
    return drift;
}

} // namespace plrs::dynamics
