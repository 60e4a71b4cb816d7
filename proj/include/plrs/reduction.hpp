#pragma once

#include "plrs/heisenberg.hpp"
#include "plrs/matcore.hpp"

namespace plrs {

/// Coupling constant x of the reduction, |x| > 1e-12.
class Coupling {
public:
    explicit Coupling(double x);
    double value() const noexcept { return x_; }

private:
    double x_;
};

/// Ordered angles pi > q_1 > ... > q_n >= 0 encoding the regular torus element T = diag(exp(2 i q_k)).
class AlcovePoint {
public:
    /// Throws `Error(invalid_argument)` for angles outside [0, pi) and `Error(degenerate_alcove)` when
    /// the angles are not strictly decreasing with gaps above `tol.alcove_gap` (cyclically, mod pi).
    static AlcovePoint from(RVector q, const Tolerances& tol = {});

    const RVector& q() const noexcept { return q_; }
    Eigen::Index size() const noexcept { return q_.size(); }
    /// T = diag(exp(2 i q_k))
    UnitaryMatrix torus() const;
    /// The smallest cyclic separation between neighbouring angles.
    double min_gap() const;

private:
    explicit AlcovePoint(RVector q) : q_(std::move(q)) {}
    RVector q_;
};

/// Darboux coordinates (q, p) on the reduced phase space.
class PhasePoint {
public:
    static PhasePoint from(RVector q, RVector p, const Tolerances& tol = {});
    PhasePoint(AlcovePoint q, RVector p);

    const AlcovePoint& alcove() const noexcept { return q_; }
    const RVector& q() const noexcept { return q_.q(); }
    const RVector& p() const noexcept { return p_; }
    Eigen::Index size() const noexcept { return p_.size(); }

private:
    AlcovePoint q_;
    RVector p_;
};

namespace reduction {

/// Coefficient and sign pattern of the logarithmic sums in zeta. Only the default is correct;
/// the alternatives exist so the verification suite can prove it detects them.
struct DarbouxConvention {
    double coefficient = 0.25;
    bool flipped_signs = false;
};

/// nu(x): unit diagonal, nu_jk = (1 - e^{-x}) e^{(k-j)x/2} above it.
BorelElement nu(Coupling x, int n);

/// v_k = sqrt(n (e^x - 1) / (1 - e^{-nx})) e^{-kx/2}, k = 1..n.
RVector kks_vector(Coupling x, int n);

/// 1 + sinh^2(x/2) / sin^2(q_k - q_m)
double pair_factor(double qk, double qm, Coupling x);

/// Unit upper-triangular n(T) solving n = nu(x) T n T^{-1}.
CMatrix n_matrix(const AlcovePoint& q, Coupling x);

/// Closed-form inverse of n(T).
CMatrix n_matrix_inverse(const AlcovePoint& q, Coupling x);

RVector zeta(const PhasePoint& point, Coupling x, const DarbouxConvention& conv = {});

/// Inverts `zeta` for the momenta at fixed positions.
RVector momenta_from_zeta(const AlcovePoint& q, const RVector& zeta, Coupling x,
                          const DarbouxConvention& conv = {});

/// n(T) a T^{-1} with a = diag(exp(zeta)).
DoublePoint slice_point(const PhasePoint& point, Coupling x, const Tolerances& tol = {},
                        const DarbouxConvention& conv = {});

/// a^{-1} n(T)^{-1} (n(T)^dagger)^{-1} a^{-1}, assembled from matrix products.
CMatrix lax_reduced(const PhasePoint& point, Coupling x, const DarbouxConvention& conv = {});

/// Componentwise closed form of the reduced Lax matrix, including the Gamma phases.
CMatrix lax_components(const PhasePoint& point, Coupling x);

/// Diagonal unitary of the phases Gamma_k.
UnitaryMatrix gamma_phases(const AlcovePoint& q, Coupling x);

/// Trigonometric Ruijsenaars-Schneider Lax matrix Gamma^{-1} L Gamma.
CMatrix rs_lax(const PhasePoint& point, Coupling x);

/// sum_k cosh(p_k) prod_{m != k} pair_factor(q_k, q_m)^{1/2}
double rs_hamiltonian(const PhasePoint& point, Coupling x);

double reduced_hamiltonian(const PhasePoint& point, Coupling x, const MuWeights& mu,
                           const Tolerances& tol = {});

/// Maps arbitrary angles to the alcove: q mod pi, sorted decreasingly, momenta permuted along.
PhasePoint to_alcove(const RVector& q, const RVector& p, const Tolerances& tol = {});

struct SliceDecomposition {
    UnitaryMatrix gauge;  // K = gauge |> slice_point(point)
    PhasePoint point;
};

/// Canonical representative of a constrained point on the slice. Throws
/// `Error(constraint_violated)` if ||Lambda(K) - nu(x)||_F >= constraint_tol.
SliceDecomposition decompose_to_slice(const DoublePoint& k, Coupling x, const Tolerances& tol = {},
                                      double constraint_tol = 1e-6);

} // namespace reduction
} // namespace plrs
