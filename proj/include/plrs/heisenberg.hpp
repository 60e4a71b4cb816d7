#pragma once

#include "plrs/matcore.hpp"

#include <initializer_list>
#include <map>
#include <utility>

namespace plrs {

/// A point of GL(n, C) viewed as the phase space of Poisson-Lie symmetric free motion.
class DoublePoint {
public:
    /// Throws `Error(singular)` if `k` is not invertible.
    static DoublePoint from(CMatrix k, const Tolerances& tol = {});

    const CMatrix& mat() const noexcept { return k_; }
    Eigen::Index dim() const noexcept { return k_.rows(); }

private:
    explicit DoublePoint(CMatrix k) : k_(std::move(k)) {}
    CMatrix k_;
};

/// Finite-support weights mu_j, j != 0, selecting H_mu = 1/2 sum_j (mu_j / j) tr L^j.
class MuWeights {
public:
    MuWeights() = default;
    MuWeights(std::initializer_list<std::pair<const int, double>> terms);

    /// Throws `Error(invalid_argument)` for j == 0 or a non-finite weight. Zero weights are dropped.
    void set(int power, double weight);

    const std::map<int, double>& terms() const noexcept { return terms_; }
    bool empty() const noexcept { return terms_.empty(); }

    /// sum_j mu_j lambda^{-j}, the spectral function generating the free flow.
    double flow_generator(double lambda) const;
    /// 1/2 sum_j (mu_j / j) lambda^j, the spectral function of the Hamiltonian.
    double hamiltonian_density(double lambda) const;

private:
    std::map<int, double> terms_;
};

namespace heisenberg {

struct IwasawaMaps {
    BorelElement lambda_left;    // K = lambda_left * xi_right^{-1}
    BorelElement lambda_right;   // K = xi_left * lambda_right^{-1}
    UnitaryMatrix xi_left;
    UnitaryMatrix xi_right;
};

IwasawaMaps iwasawa_maps(const DoublePoint& k, const Tolerances& tol = {});

/// L(K) = (K^dagger K)^{-1}
CMatrix lax_free(const DoublePoint& k, const Tolerances& tol = {});

/// 1/2 sum_j (mu_j / j) tr(L^j) for a Hermitian positive-definite L, from traces of matrix powers.
double spectral_hamiltonian(const CMatrix& lax, const MuWeights& mu, const Tolerances& tol = {});

double hamiltonian_free(const DoublePoint& k, const MuWeights& mu, const Tolerances& tol = {});

/// g |> K = g K Xi_R(g Lambda_L(K))
DoublePoint quasi_adjoint(const UnitaryMatrix& g, const DoublePoint& k, const Tolerances& tol = {});

/// Lambda(K) = Lambda_L(K) Lambda_R(K)
BorelElement moment_map(const DoublePoint& k, const Tolerances& tol = {});

/// K(t) = b exp(-i t sum_j mu_j (b^dagger b)^{-j}) g^{-1} where K0 = b g^{-1}.
DoublePoint free_flow(const DoublePoint& k0, const MuWeights& mu, double t, const Tolerances& tol = {});

} // namespace heisenberg
} // namespace plrs
