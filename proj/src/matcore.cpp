#include "plrs/matcore.hpp"

#include "plrs/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <vector>

namespace plrs {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

bool all_finite(const CMatrix& m) {
    return m.allFinite();
}

void require_square(const CMatrix& m, const char* what) {
    if (m.rows() == 0 || m.rows() != m.cols()) {
        throw Error(ErrorCode::invalid_argument, std::string(what) + ": matrix must be square and non-empty");
    }
    if (!all_finite(m)) {
        throw Error(ErrorCode::invalid_argument, std::string(what) + ": non-finite entry");
    }
}

CMatrix hermitian_part(const CMatrix& h) {
    return (h + h.adjoint()) * 0.5;
}

Eigen::SelfAdjointEigenSolver<CMatrix> hermitian_solver(const CMatrix& h, const Tolerances& tol,
                                                        const char* what) {
    require_square(h, what);
    if (!matcore::is_hermitian(h, tol)) {
        throw Error(ErrorCode::not_hermitian, std::string(what) + ": matrix is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(h));
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::no_convergence, std::string(what) + ": Hermitian eigensolver failed");
    }
    return solver;
}

} // namespace

void Tolerances::validate() const {
    if (!(zero > 0 && unitary > 0 && eig > 0 && alcove_gap > 0)) {
        throw Error(ErrorCode::invalid_argument, "tolerances must be strictly positive");
    }
}

BorelElement BorelElement::from(CMatrix m, const Tolerances& tol) {
    require_square(m, "BorelElement");
    const double scale = std::max(1.0, matcore::frobenius(m));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            if (std::abs(m(i, j)) >= tol.zero * scale) {
                throw Error(ErrorCode::invalid_argument, "BorelElement: non-zero entry below the diagonal");
            }
            m(i, j) = 0.0;
        }
        if (std::abs(m(i, i).imag()) >= tol.zero * scale || !(m(i, i).real() > 0.0)) {
            throw Error(ErrorCode::invalid_argument, "BorelElement: diagonal must be real and positive");
        }
        m(i, i) = m(i, i).real();
    }
    return BorelElement(std::move(m));
}

BorelElement BorelElement::identity(Eigen::Index n) {
    return BorelElement(CMatrix::Identity(n, n));
}

BorelElement BorelElement::inverse() const {
    const Eigen::Index n = dim();
    CMatrix inv = m_.triangularView<Eigen::Upper>().solve(CMatrix::Identity(n, n));
    inv.triangularView<Eigen::StrictlyLower>().setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
        inv(i, i) = 1.0 / m_(i, i).real();
    }
    return BorelElement(std::move(inv));
}

BorelElement BorelElement::operator*(const BorelElement& other) const {
    CMatrix prod = m_.triangularView<Eigen::Upper>() * other.m_;
    prod.triangularView<Eigen::StrictlyLower>().setZero();
    for (Eigen::Index i = 0; i < prod.rows(); ++i) {
        prod(i, i) = m_(i, i).real() * other.m_(i, i).real();
    }
    return BorelElement(std::move(prod));
}

UnitaryMatrix UnitaryMatrix::from(CMatrix m, const Tolerances& tol) {
    require_square(m, "UnitaryMatrix");
    const Eigen::Index n = m.rows();
    const double defect = (m.adjoint() * m - CMatrix::Identity(n, n)).norm();
    if (!(defect < tol.unitary)) {
        std::ostringstream msg;
        msg << "UnitaryMatrix: unitarity defect " << defect << " exceeds " << tol.unitary;
        throw Error(ErrorCode::not_unitary, msg.str());
    }
    return UnitaryMatrix(std::move(m));
}

UnitaryMatrix UnitaryMatrix::identity(Eigen::Index n) {
    return UnitaryMatrix(CMatrix::Identity(n, n));
}

UnitaryMatrix UnitaryMatrix::diagonal_phases(const RVector& angles) {
    CMatrix d = CMatrix::Zero(angles.size(), angles.size());
    for (Eigen::Index k = 0; k < angles.size(); ++k) {
        d(k, k) = std::polar(1.0, angles[k]);
    }
    return UnitaryMatrix(std::move(d));
}

namespace matcore {

double frobenius(const CMatrix& m) {
    return m.norm();
}

double relative_residual(const CMatrix& a, const CMatrix& b) {
    return (a - b).norm() / std::max(1.0, b.norm());
}

bool is_hermitian(const CMatrix& h, const Tolerances& tol) {
    if (h.rows() != h.cols()) {
        return false;
    }
    return (h - h.adjoint()).norm() <= tol.zero * std::max(1.0, h.norm());
}

void require_invertible(const CMatrix& k, const Tolerances& tol) {
    require_square(k, "require_invertible");
    Eigen::JacobiSVD<CMatrix> svd(k);
    const auto& s = svd.singularValues();
    if (!(s[s.size() - 1] > tol.zero * s[0])) {
        throw Error(ErrorCode::singular, "matrix is singular to working tolerance");
    }
}

BorelElement uu_dagger_factor(const CMatrix& h, const Tolerances& tol) {
    require_square(h, "uu_dagger_factor");
    if (!is_hermitian(h, tol)) {
        throw Error(ErrorCode::not_hermitian, "uu_dagger_factor: input is not Hermitian");
    }
    const Eigen::Index n = h.rows();
    CMatrix b = CMatrix::Zero(n, n);
    // Columns from the right: b_jj^2 = H_jj - sum_{k>j} |b_jk|^2.
    for (Eigen::Index j = n - 1; j >= 0; --j) {
        double pivot = h(j, j).real();
        for (Eigen::Index k = j + 1; k < n; ++k) {
            pivot -= std::norm(b(j, k));
        }
        if (!(pivot > 0.0) || !std::isfinite(pivot)) {
            throw Error(ErrorCode::not_positive_definite, "uu_dagger_factor: non-positive pivot");
        }
        const double d = std::sqrt(pivot);
        b(j, j) = d;
        for (Eigen::Index i = 0; i < j; ++i) {
            Complex s = 0.5 * (h(i, j) + std::conj(h(j, i)));
            for (Eigen::Index k = j + 1; k < n; ++k) {
                s -= b(i, k) * std::conj(b(j, k));
            }
            b(i, j) = s / d;
        }
    }
    return BorelElement::from(std::move(b), tol);
}

namespace {

// K = Q R with R upper-triangular and a positive real diagonal.
std::pair<CMatrix, CMatrix> positive_qr(const CMatrix& k) {
    const Eigen::HouseholderQR<CMatrix> qr(k);
    CMatrix q = qr.householderQ() * CMatrix::Identity(k.rows(), k.cols());
    CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < r.rows(); ++j) {
        const double mod = std::abs(r(j, j));
        const Complex phase = r(j, j) / mod;
        q.col(j) *= phase;
        r.row(j) *= std::conj(phase);
    }
    return {std::move(q), std::move(r)};
}

} // namespace

// Householder QR keeps the unitary factor orthonormal to working precision; building it from
// the Cholesky-type factor of K K^dagger loses orthogonality like cond(K)^2.
LeftIwasawa iwasawa_left(const CMatrix& k, const Tolerances& tol) {
    require_invertible(k, tol);
    // With J the reversal, J K^dagger J = Q R gives K = (J R J)^dagger (J Q J)^dagger.
    const auto [q, r] = positive_qr(k.adjoint().reverse());
    return {BorelElement::from(r.reverse().adjoint(), tol), UnitaryMatrix::from(q.reverse(), tol)};
}

RightIwasawa iwasawa_right(const CMatrix& k, const Tolerances& tol) {
    require_invertible(k, tol);
    // K = g b^{-1} is the QR factorization with b = R^{-1}.
    const auto [q, r] = positive_qr(k);
    CMatrix b = r.triangularView<Eigen::Upper>().solve(CMatrix::Identity(k.rows(), k.cols()));
    return {UnitaryMatrix::from(q, tol), BorelElement::from(std::move(b), tol)};
}

UnitaryEigen unitary_eig(const UnitaryMatrix& u, const Tolerances& tol) {
    const Eigen::Index n = u.dim();
    Eigen::ComplexSchur<CMatrix> schur(n);
    schur.setMaxIterations(200 * n);
    schur.compute(u.mat());
    if (schur.info() != Eigen::Success) {
        throw Error(ErrorCode::no_convergence, "unitary_eig: Schur iteration did not converge");
    }
    const CMatrix& tri = schur.matrixT();
    const CMatrix& q = schur.matrixU();

    std::vector<double> raw(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        double theta = std::arg(tri(k, k));
        if (theta < 0.0) {
            theta += two_pi;
        }
        if (theta >= two_pi) {
            theta = 0.0;
        }
        raw[k] = theta;
    }
    auto lead_phase = [&](Eigen::Index col) {
        for (Eigen::Index r = 0; r < n; ++r) {
            if (std::abs(q(r, col)) > tol.zero) {
                return std::arg(q(r, col));
            }
        }
        return 0.0;
    };
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (raw[a] != raw[b]) {
            return raw[a] > raw[b];
        }
        return lead_phase(a) < lead_phase(b);
    });

    UnitaryEigen out{RVector(n), UnitaryMatrix::identity(n), false};
    CMatrix v(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.angles[k] = raw[order[k]];
        v.col(k) = q.col(order[k]);
    }
    out.vectors = UnitaryMatrix::from(std::move(v), tol);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        if (out.angles[k] - out.angles[k + 1] < tol.alcove_gap) {
            out.degenerate = true;
        }
    }
    if (n > 1 && two_pi - (out.angles[0] - out.angles[n - 1]) < tol.alcove_gap) {
        out.degenerate = true;
    }
    return out;
}

UnitaryMatrix herm_exp(const CMatrix& h, double s, const Tolerances& tol) {
    const auto solver = hermitian_solver(h, tol, "herm_exp");
    const auto& lambda = solver.eigenvalues();
    const CMatrix& v = solver.eigenvectors();
    CVector phases(lambda.size());
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        phases[k] = std::polar(1.0, s * lambda[k]);
    }
    return UnitaryMatrix::from(v * phases.asDiagonal() * v.adjoint(), tol);
}

RVector hermitian_eigenvalues(const CMatrix& h, const Tolerances& tol) {
    return hermitian_solver(h, tol, "hermitian_eigenvalues").eigenvalues();
}

CMatrix hermitian_log(const CMatrix& h, const Tolerances& tol) {
    const auto solver = hermitian_solver(h, tol, "hermitian_log");
    const auto& lambda = solver.eigenvalues();
    if (!(lambda.minCoeff() > 0.0)) {
        throw Error(ErrorCode::not_positive_definite, "hermitian_log: matrix is not positive definite");
    }
    const CMatrix& v = solver.eigenvectors();
    return v * lambda.array().log().matrix().cast<Complex>().asDiagonal() * v.adjoint();
}

} // namespace matcore
} // namespace plrs
