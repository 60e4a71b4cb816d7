#pragma once

#include <Eigen/Dense>

#include <complex>

namespace plrs {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Numerical thresholds shared by all modules. Passed explicitly, never global.
struct Tolerances {
    double zero = 1e-10;       // structural zeros, Hermiticity, invertibility (relative to the norm)
    double unitary = 1e-9;     // ||U^dagger U - 1||_F
    double eig = 1e-12;        // eigensolver convergence target
    double alcove_gap = 1e-8;  // minimum eigenangle separation counted as regular

    /// Throws `Error(invalid_argument)` unless every field is strictly positive.
    void validate() const;
};

/// Upper-triangular matrix with strictly positive real diagonal (the group B).
class BorelElement {
public:
    /// Validates the structure; throws `Error(invalid_argument)` on violation.
    static BorelElement from(CMatrix m, const Tolerances& tol = {});
    static BorelElement identity(Eigen::Index n);

    const CMatrix& mat() const noexcept { return m_; }
    Eigen::Index dim() const noexcept { return m_.rows(); }

    BorelElement inverse() const;
    BorelElement operator*(const BorelElement& other) const;

private:
    explicit BorelElement(CMatrix m) : m_(std::move(m)) {}
    CMatrix m_;
};

class UnitaryMatrix {
public:
    /// Validates ||U^dagger U - 1||_F < tol.unitary; throws `Error(not_unitary)`.
    static UnitaryMatrix from(CMatrix m, const Tolerances& tol = {});
    static UnitaryMatrix identity(Eigen::Index n);
    /// diag(exp(i * angles_k))
    static UnitaryMatrix diagonal_phases(const RVector& angles);

    const CMatrix& mat() const noexcept { return m_; }
    Eigen::Index dim() const noexcept { return m_.rows(); }

    UnitaryMatrix inverse() const { return UnitaryMatrix(m_.adjoint()); }
    UnitaryMatrix operator*(const UnitaryMatrix& other) const { return UnitaryMatrix(m_ * other.m_); }

private:
    explicit UnitaryMatrix(CMatrix m) : m_(std::move(m)) {}
    CMatrix m_;
};

namespace matcore {

/// K = borel * unitary^{-1}
struct LeftIwasawa {
    BorelElement borel;
    UnitaryMatrix unitary;
};

/// K = unitary * borel^{-1}
struct RightIwasawa {
    UnitaryMatrix unitary;
    BorelElement borel;
};

struct UnitaryEigen {
    RVector angles;         // in [0, 2pi), strictly decreasing unless `degenerate`
    UnitaryMatrix vectors;  // columns are eigenvectors, in the order of `angles`
    bool degenerate = false;
};

double frobenius(const CMatrix& m);

/// ||A - B||_F / max(1, ||B||_F)
double relative_residual(const CMatrix& a, const CMatrix& b);

bool is_hermitian(const CMatrix& h, const Tolerances& tol = {});

/// Throws `Error(singular)` unless sigma_min > tol.zero * sigma_max.
void require_invertible(const CMatrix& k, const Tolerances& tol = {});

/// Upper-triangular b with positive diagonal and b * b^dagger = H (backward Cholesky).
BorelElement uu_dagger_factor(const CMatrix& h, const Tolerances& tol = {});

LeftIwasawa iwasawa_left(const CMatrix& k, const Tolerances& tol = {});
RightIwasawa iwasawa_right(const CMatrix& k, const Tolerances& tol = {});

UnitaryEigen unitary_eig(const UnitaryMatrix& u, const Tolerances& tol = {});

/// exp(i s H) for Hermitian H.
UnitaryMatrix herm_exp(const CMatrix& h, double s, const Tolerances& tol = {});

/// Ascending eigenvalues of a Hermitian matrix.
RVector hermitian_eigenvalues(const CMatrix& h, const Tolerances& tol = {});

/// Principal logarithm of a Hermitian positive-definite matrix.
CMatrix hermitian_log(const CMatrix& h, const Tolerances& tol = {});

} // namespace matcore
} // namespace plrs
