#include "plrs/reduction.hpp"

#include "plrs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <vector>

namespace plrs {

namespace {

constexpr double pi = std::numbers::pi;
constexpr Complex imag_unit{0.0, 1.0};

CVector torus_entries(const AlcovePoint& q) {
    CVector t(q.size());
    for (Eigen::Index k = 0; k < q.size(); ++k) {
        t[k] = std::polar(1.0, 2.0 * q.q()[k]);
    }
    return t;
}

// prod_{m != k} pair_factor(q_k, q_m)^{power}
RVector pair_products(const RVector& q, Coupling x, double power) {
    const Eigen::Index n = q.size();
    RVector out = RVector::Ones(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index m = 0; m < n; ++m) {
            if (m != k) {
                out[k] *= std::pow(reduction::pair_factor(q[k], q[m], x), power);
            }
        }
    }
    return out;
}

} // namespace

Coupling::Coupling(double x) : x_(x) {
    if (!std::isfinite(x) || !(std::abs(x) > 1e-12)) {
        throw Error(ErrorCode::invalid_argument, "coupling x must be finite and non-zero");
    }
}

AlcovePoint AlcovePoint::from(RVector q, const Tolerances& tol) {
    if (q.size() == 0) {
        throw Error(ErrorCode::invalid_argument, "alcove point: empty angle vector");
    }
    for (Eigen::Index k = 0; k < q.size(); ++k) {
        if (!std::isfinite(q[k]) || q[k] < 0.0 || q[k] >= pi) {
            std::ostringstream msg;
            msg << "alcove point: q_" << k + 1 << " = " << q[k] << " is outside [0, pi)";
            throw Error(ErrorCode::invalid_argument, msg.str());
        }
    }
    AlcovePoint point(std::move(q));
    const double gap = point.min_gap();
    if (point.size() > 1 && !(gap > tol.alcove_gap)) {
        std::ostringstream msg;
        msg << "alcove point: angles not strictly decreasing or too close (gap " << gap << ")";
        throw Error(ErrorCode::degenerate_alcove, msg.str());
    }
    return point;
}

UnitaryMatrix AlcovePoint::torus() const {
    return UnitaryMatrix::diagonal_phases(2.0 * q_);
}

double AlcovePoint::min_gap() const {
    const Eigen::Index n = q_.size();
    if (n < 2) {
        return pi;
    }
    double gap = pi - (q_[0] - q_[n - 1]);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        gap = std::min(gap, q_[k] - q_[k + 1]);
    }
    return gap;
}

PhasePoint PhasePoint::from(RVector q, RVector p, const Tolerances& tol) {
    return PhasePoint(AlcovePoint::from(std::move(q), tol), std::move(p));
}

PhasePoint::PhasePoint(AlcovePoint q, RVector p) : q_(std::move(q)), p_(std::move(p)) {
    if (p_.size() != q_.size()) {
        throw Error(ErrorCode::invalid_argument, "phase point: q and p have different lengths");
    }
    if (!p_.allFinite()) {
        throw Error(ErrorCode::invalid_argument, "phase point: non-finite momentum");
    }
}

namespace reduction {

BorelElement nu(Coupling x, int n) {
    if (n < 1) {
        throw Error(ErrorCode::invalid_argument, "nu: n must be positive");
    }
    const double xv = x.value();
    CMatrix m = CMatrix::Identity(n, n);
    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
            m(j, k) = -std::expm1(-xv) * std::exp((k - j) * xv / 2.0);
        }
    }
    return BorelElement::from(std::move(m));
}

RVector kks_vector(Coupling x, int n) {
    if (n < 1) {
        throw Error(ErrorCode::invalid_argument, "kks_vector: n must be positive");
    }
    const double xv = x.value();
    const double norm = std::sqrt(n * std::expm1(xv) / -std::expm1(-n * xv));
    RVector v(n);
    for (int k = 1; k <= n; ++k) {
        v[k - 1] = norm * std::exp(-k * xv / 2.0);
    }
    return v;
}

double pair_factor(double qk, double qm, Coupling x) {
    const double s = std::sinh(x.value() / 2.0);
    const double d = std::sin(qk - qm);
    return 1.0 + s * s / (d * d);
}

CMatrix n_matrix(const AlcovePoint& q, Coupling x) {
    const Eigen::Index n = q.size();
    const CVector t = torus_entries(q);
    const double up = std::exp(x.value() / 2.0);
    const double down = std::exp(-x.value() / 2.0);
    CMatrix m = CMatrix::Identity(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index l = k + 1; l < n; ++l) {
            Complex prod = 1.0;
            for (Eigen::Index s = 1; s <= l - k; ++s) {
                prod *= (up * t[l] - down * t[k + s]) / (t[l] - t[k + s - 1]);
            }
            m(k, l) = prod;
        }
    }
    return m;
}

CMatrix n_matrix_inverse(const AlcovePoint& q, Coupling x) {
    const Eigen::Index n = q.size();
    const CVector t = torus_entries(q).conjugate();
    const double up = std::exp(x.value() / 2.0);
    const double down = std::exp(-x.value() / 2.0);
    CMatrix m = CMatrix::Identity(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index l = k + 1; l < n; ++l) {
            Complex prod = 1.0;
            for (Eigen::Index s = 1; s <= l - k; ++s) {
                prod *= (down * t[k] - up * t[k + s - 1]) / (t[k] - t[k + s]);
            }
            m(k, l) = prod;
        }
    }
    return m;
}

namespace {

// c * (sum_{m>k} ln f - sum_{m<k} ln f), the position-dependent part of zeta_k.
RVector zeta_offsets(const RVector& q, Coupling x, const DarbouxConvention& conv) {
    const Eigen::Index n = q.size();
    const double sign = conv.flipped_signs ? -1.0 : 1.0;
    RVector out = RVector::Zero(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index m = 0; m < n; ++m) {
            if (m == k) {
                continue;
            }
            const double log_f = std::log(pair_factor(q[k], q[m], x));
            out[k] += (m > k ? 1.0 : -1.0) * sign * conv.coefficient * log_f;
        }
    }
    return out;
}

} // namespace

RVector zeta(const PhasePoint& point, Coupling x, const DarbouxConvention& conv) {
    return -0.5 * point.p() + zeta_offsets(point.q(), x, conv);
}

RVector momenta_from_zeta(const AlcovePoint& q, const RVector& zeta, Coupling x, const DarbouxConvention& conv) {
    if (zeta.size() != q.size()) {
        throw Error(ErrorCode::invalid_argument, "momenta_from_zeta: size mismatch");
    }
    return -2.0 * (zeta - zeta_offsets(q.q(), x, conv));
}

DoublePoint slice_point(const PhasePoint& point, Coupling x, const Tolerances& tol, const DarbouxConvention& conv) {
    const RVector z = zeta(point, x, conv);
    const CMatrix nt = n_matrix(point.alcove(), x);
    const CMatrix a = z.array().exp().matrix().cast<Complex>().asDiagonal();
    const CMatrix t_inv = point.alcove().torus().inverse().mat();
    return DoublePoint::from(nt * a * t_inv, tol);
}

CMatrix lax_reduced(const PhasePoint& point, Coupling x, const DarbouxConvention& conv) {
    const Eigen::Index n = point.size();
    const RVector a_inv = (-zeta(point, x, conv)).array().exp();
    const CMatrix nt = n_matrix(point.alcove(), x);
    const CMatrix nt_inv = nt.triangularView<Eigen::UnitUpper>().solve(CMatrix::Identity(n, n));
    const CMatrix core = nt_inv * nt_inv.adjoint();
    CMatrix l = a_inv.cast<Complex>().asDiagonal() * core * a_inv.cast<Complex>().asDiagonal();
    return (l + l.adjoint()) * 0.5;
}

UnitaryMatrix gamma_phases(const AlcovePoint& q, Coupling x) {
    const Eigen::Index n = q.size();
    const double up = std::exp(x.value() / 2.0);
    const double down = std::exp(-x.value() / 2.0);
    RVector phase(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        Complex z = std::polar(1.0, -q.q()[k]);
        const Complex tk = std::polar(1.0, -2.0 * q.q()[k]);
        for (Eigen::Index m = k + 1; m < n; ++m) {
            const Complex tm = std::polar(1.0, -2.0 * q.q()[m]);
            z *= (down * tk - up * tm) / (tk - tm);
        }
        phase[k] = std::arg(z);
    }
    return UnitaryMatrix::diagonal_phases(phase);
}

CMatrix rs_lax(const PhasePoint& point, Coupling x) {
    const Eigen::Index n = point.size();
    const RVector& q = point.q();
    const RVector& p = point.p();
    const double s = std::sinh(x.value() / 2.0);
    const RVector quarter = pair_products(q, x, 0.25);
    CMatrix l(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const Complex kernel = s / std::sinh(x.value() / 2.0 + imag_unit * (q[k] - q[j]));
            l(k, j) = std::exp((p[k] + p[j]) / 2.0) * kernel * quarter[k] * quarter[j];
        }
    }
    return l;
}

CMatrix lax_components(const PhasePoint& point, Coupling x) {
    const CMatrix rs = rs_lax(point, x);
    const CVector gamma = gamma_phases(point.alcove(), x).mat().diagonal();
    CMatrix l(rs.rows(), rs.cols());
    for (Eigen::Index k = 0; k < rs.rows(); ++k) {
        for (Eigen::Index j = 0; j < rs.cols(); ++j) {
            l(k, j) = gamma[k] * std::conj(gamma[j]) * rs(k, j);
        }
    }
    return l;
}

double rs_hamiltonian(const PhasePoint& point, Coupling x) {
    const RVector half = pair_products(point.q(), x, 0.5);
    double h = 0.0;
    for (Eigen::Index k = 0; k < point.size(); ++k) {
        h += std::cosh(point.p()[k]) * half[k];
    }
    return h;
}

double reduced_hamiltonian(const PhasePoint& point, Coupling x, const MuWeights& mu, const Tolerances& tol) {
    if (mu.empty()) {
        return 0.0;
    }
    return heisenberg::spectral_hamiltonian(lax_reduced(point, x), mu, tol);
}

PhasePoint to_alcove(const RVector& q, const RVector& p, const Tolerances& tol) {
    if (q.size() != p.size()) {
        throw Error(ErrorCode::invalid_argument, "to_alcove: size mismatch");
    }
    const Eigen::Index n = q.size();
    RVector wrapped(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        double w = std::fmod(q[k], pi);
        if (w < 0.0) {
            w += pi;
        }
        if (w >= pi) {
            w = 0.0;
        }
        wrapped[k] = w;
    }
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return wrapped[a] > wrapped[b]; });
    RVector qs(n), ps(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        qs[k] = wrapped[order[k]];
        ps[k] = p[order[k]];
    }
    return PhasePoint::from(std::move(qs), std::move(ps), tol);
}

SliceDecomposition decompose_to_slice(const DoublePoint& k, Coupling x, const Tolerances& tol, double constraint_tol) {
    const int n = static_cast<int>(k.dim());
    const BorelElement target = nu(x, n);
    const double residual = (heisenberg::moment_map(k, tol).mat() - target.mat()).norm();
    if (!(residual < constraint_tol)) {
        std::ostringstream msg;
        msg << "decompose_to_slice: moment map misses nu(x) by " << residual;
        throw Error(ErrorCode::constraint_violated, msg.str());
    }

    // Xi_R(K) = h T h^{-1} with T ordered in the alcove.
    const auto left = matcore::iwasawa_left(k.mat(), tol);
    const auto spectrum = matcore::unitary_eig(left.unitary, tol);
    if (spectrum.degenerate) {
        throw Error(ErrorCode::degenerate_alcove, "decompose_to_slice: eigenangles of Xi_R(K) collide");
    }
    const RVector q = spectrum.angles / 2.0;

    // Xi_R(g^{-1} Lambda_L(K)) = h  <=>  Lambda_L(K) h = g beta with beta in B.
    const auto factor = matcore::iwasawa_right(left.borel.mat() * spectrum.vectors.mat(), tol);
    CMatrix g = factor.unitary.mat();

    // Residual torus freedom: the phases making g^{-1} v real and non-negative.
    const CVector w = g.adjoint() * kks_vector(x, n).cast<Complex>();
    for (int j = 0; j < n; ++j) {
        const double mod = std::abs(w[j]);
        if (!(mod > tol.zero)) {
            throw Error(ErrorCode::constraint_violated, "decompose_to_slice: gauge vector has a vanishing component");
        }
        g.col(j) *= w[j] / mod;
    }
    const UnitaryMatrix gauge = UnitaryMatrix::from(std::move(g), tol);

    const DoublePoint representative = heisenberg::quasi_adjoint(gauge.inverse(), k, tol);
    const auto rep_left = matcore::iwasawa_left(representative.mat(), tol);
    RVector z(n);
    for (int j = 0; j < n; ++j) {
        z[j] = std::log(rep_left.borel.mat()(j, j).real());
    }
    AlcovePoint alcove = AlcovePoint::from(q, tol);
    RVector p = momenta_from_zeta(alcove, z, x);
    return {gauge, PhasePoint(std::move(alcove), std::move(p))};
}

} // namespace reduction
} // namespace plrs
