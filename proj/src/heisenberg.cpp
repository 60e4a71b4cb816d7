#include "plrs/heisenberg.hpp"

#include "plrs/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <optional>

namespace plrs {

DoublePoint DoublePoint::from(CMatrix k, const Tolerances& tol) {
    matcore::require_invertible(k, tol);
    return DoublePoint(std::move(k));
}

MuWeights::MuWeights(std::initializer_list<std::pair<const int, double>> terms) {
    for (const auto& [power, weight] : terms) {
        set(power, weight);
    }
}

void MuWeights::set(int power, double weight) {
    if (power == 0) {
        throw Error(ErrorCode::invalid_argument, "mu weights: power 0 is not allowed");
    }
    if (!std::isfinite(weight)) {
        throw Error(ErrorCode::invalid_argument, "mu weights: weight must be finite");
    }
    if (weight == 0.0) {
        terms_.erase(power);
    } else {
        terms_[power] = weight;
    }
}

double MuWeights::flow_generator(double lambda) const {
    double s = 0.0;
    for (const auto& [j, w] : terms_) {
        s += w * std::pow(lambda, -j);
    }
    return s;
}

double MuWeights::hamiltonian_density(double lambda) const {
    double s = 0.0;
    for (const auto& [j, w] : terms_) {
        s += 0.5 * w / j * std::pow(lambda, j);
    }
    return s;
}

namespace heisenberg {

IwasawaMaps iwasawa_maps(const DoublePoint& k, const Tolerances& tol) {
    auto left = matcore::iwasawa_left(k.mat(), tol);
    auto right = matcore::iwasawa_right(k.mat(), tol);
    return {std::move(left.borel), std::move(right.borel), std::move(right.unitary), std::move(left.unitary)};
}

CMatrix lax_free(const DoublePoint& k, const Tolerances& tol) {
    (void)tol;
    const CMatrix gram = k.mat().adjoint() * k.mat();
    CMatrix l = gram.llt().solve(CMatrix::Identity(k.dim(), k.dim()));
    return (l + l.adjoint()) * 0.5;
}

double spectral_hamiltonian(const CMatrix& lax, const MuWeights& mu, const Tolerances& tol) {
    if (mu.empty()) {
        return 0.0;
    }
    if (!matcore::is_hermitian(lax, tol)) {
        throw Error(ErrorCode::not_hermitian, "spectral_hamiltonian: Lax matrix is not Hermitian");
    }
    const CMatrix l = (lax + lax.adjoint()) * 0.5;
    Eigen::LLT<CMatrix> llt(l);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::not_positive_definite, "spectral_hamiltonian: Lax matrix is not positive definite");
    }
    // Traces of matrix powers vary smoothly with the entries, unlike an iterative eigensolve,
    // which keeps finite-difference gradients of the Hamiltonian clean.
    std::optional<CMatrix> inverse;
    double h = 0.0;
    for (const auto& [power, weight] : mu.terms()) {
        const CMatrix& base = power > 0 ? l : (inverse ? *inverse : inverse.emplace(llt.solve(CMatrix::Identity(l.rows(), l.cols()))));
        CMatrix acc = base;
        for (int j = 1; j < std::abs(power); ++j) {
            acc = acc * base;
        }
        h += 0.5 * weight / power * acc.trace().real();
    }
    return h;
}

double hamiltonian_free(const DoublePoint& k, const MuWeights& mu, const Tolerances& tol) {
    return spectral_hamiltonian(lax_free(k, tol), mu, tol);
}

DoublePoint quasi_adjoint(const UnitaryMatrix& g, const DoublePoint& k, const Tolerances& tol) {
    if (g.dim() != k.dim()) {
        throw Error(ErrorCode::invalid_argument, "quasi_adjoint: dimension mismatch");
    }
    const auto left = matcore::iwasawa_left(k.mat(), tol);
    const auto twist = matcore::iwasawa_left(g.mat() * left.borel.mat(), tol);
    return DoublePoint::from(g.mat() * k.mat() * twist.unitary.mat(), tol);
}

BorelElement moment_map(const DoublePoint& k, const Tolerances& tol) {
    const auto maps = iwasawa_maps(k, tol);
    return maps.lambda_left * maps.lambda_right;
}

DoublePoint free_flow(const DoublePoint& k0, const MuWeights& mu, double t, const Tolerances& tol) {
    if (mu.empty() || t == 0.0) {
        return k0;
    }
    const auto [b, g] = matcore::iwasawa_left(k0.mat(), tol);
    const CMatrix gram = b.mat().adjoint() * b.mat();
    Eigen::SelfAdjointEigenSolver<CMatrix> solver((gram + gram.adjoint()) * 0.5);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::no_convergence, "free_flow: eigensolver failed");
    }
    const RVector& lambda = solver.eigenvalues();
    const CMatrix& v = solver.eigenvectors();
    CVector phases(lambda.size());
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        phases[k] = std::polar(1.0, -t * mu.flow_generator(lambda[k]));
    }
    const CMatrix geodesic = v * phases.asDiagonal() * v.adjoint();
    return DoublePoint::from(b.mat() * geodesic * g.mat().adjoint(), tol);
}

} // namespace heisenberg
} // namespace plrs
