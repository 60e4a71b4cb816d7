#include "plrs/verify.hpp"

#include "plrs/dynamics.hpp"
#include "plrs/errors.hpp"
#include "plrs/heisenberg.hpp"
#include "plrs/reduction.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>

namespace plrs::verify {

namespace {

constexpr double pi = std::numbers::pi;

using reduction::DarbouxConvention;

struct Measurement {
    double worst = 0.0;
    std::size_t samples = 0;

    void add(double value) {
        // NaN must register as a failure, never as a pass.
        worst = std::isnan(value) || std::isnan(worst) ? std::numeric_limits<double>::quiet_NaN()
                                                       : std::max(worst, value);
        ++samples;
    }
};

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double gauss() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    CMatrix complex_gaussian(int n) {
        CMatrix m(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                m(i, j) = Complex(gauss(), gauss()) / std::sqrt(2.0);
            }
        }
        return m;
    }

    /// Well-conditioned invertible matrix around the identity scale.
    /// Near-identity K with sigma_min / sigma_max above `min_ratio`.
    CMatrix invertible(int n, double min_ratio = 1e-2) {
        for (;;) {
            CMatrix k = CMatrix::Identity(n, n) + 0.6 * complex_gaussian(n) / std::sqrt(double(n));
            Eigen::JacobiSVD<CMatrix> svd(k);
            const auto& s = svd.singularValues();
            if (s[n - 1] > min_ratio * s[0]) {
                return k;
            }
        }
    }

    UnitaryMatrix unitary(int n) {
        const CMatrix g = complex_gaussian(n);
        Eigen::HouseholderQR<CMatrix> qr(g);
        CMatrix q = qr.householderQ();
        const CMatrix r = qr.matrixQR();
        for (int j = 0; j < n; ++j) {
            const Complex d = r(j, j);
            if (std::abs(d) > 0) {
                q.col(j) *= d / std::abs(d);
            }
        }
        return UnitaryMatrix::from(std::move(q));
    }

    CMatrix hermitian(int n) {
        const CMatrix g = complex_gaussian(n);
        return (g + g.adjoint()) * 0.5;
    }

    BorelElement borel(int n) {
        CMatrix b = CMatrix::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            b(i, i) = uniform(0.1, 10.0);
            for (int j = i + 1; j < n; ++j) {
                b(i, j) = Complex(gauss(), gauss());
            }
        }
        return BorelElement::from(std::move(b));
    }

    /// Alcove angles whose cyclic gaps all exceed `spread * pi / n`, kept `edge` away from 0 and pi.
    AlcovePoint alcove(int n, double spread = 0.3, double edge = 0.0) {
        for (;;) {
            RVector q(n);
            for (int k = 0; k < n; ++k) {
                q[k] = uniform(edge, pi - edge);
            }
            std::sort(q.data(), q.data() + n, std::greater<>());
            bool ok = true;
            for (int k = 0; k + 1 < n; ++k) {
                ok = ok && q[k] - q[k + 1] > spread * pi / n;
            }
            if (n > 1) {
                ok = ok && pi - (q[0] - q[n - 1]) > spread * pi / n;
            }
            if (ok) {
                return AlcovePoint::from(std::move(q));
            }
        }
    }

    PhasePoint phase_point(int n, double p_max = 1.0, double spread = 0.3, double edge = 0.0) {
        AlcovePoint q = alcove(n, spread, edge);
        RVector p(n);
        for (int k = 0; k < n; ++k) {
            p[k] = uniform(-p_max, p_max);
        }
        return PhasePoint(std::move(q), std::move(p));
    }

    Coupling coupling(double max_magnitude = 2.5) {
        const double mag = uniform(0.3, max_magnitude);
        return Coupling(integer(0, 1) == 0 ? mag : -mag);
    }

    /// Unitary commuting with nu(x) nu(x)^dagger: a phase on v times an arbitrary unitary on its complement.
    UnitaryMatrix isotropy(Coupling x, int n) {
        const RVector v = reduction::kks_vector(x, n) / std::sqrt(double(n));
        const CMatrix proj = v.cast<Complex>() * v.cast<Complex>().adjoint();
        const CMatrix comp = CMatrix::Identity(n, n) - proj;
        const CMatrix gen = comp * hermitian(n) * comp;
        const CMatrix rot = matcore::herm_exp(gen, 1.0).mat();
        return UnitaryMatrix::from(rot * comp + std::polar(1.0, uniform(0.0, 2.0 * pi)) * proj);
    }

private:
    std::mt19937_64 rng_;
};

struct Context {
    const Options& options;
    Sampler& rng;

    int n_cap(int limit) const { return std::min(limit, options.n_max); }
    DarbouxConvention convention() const {
        switch (options.mutation) {
        case Mutation::zeta_half: return {0.5, false};
        case Mutation::zeta_flipped_signs: return {0.25, true};
        default: return {};
        }
    }
};

struct Property {
    const char* module;
    const char* name;
    int criterion;
    double tolerance;
    std::function<Measurement(Context&)> run;
};

double rel(const CMatrix& a, const CMatrix& b) {
    return matcore::relative_residual(a, b);
}

double rel_vec(const RVector& a, const RVector& b) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
    }
    return worst;
}

double rel_scalar(double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::abs(b));
}

// Largest circular distance between matched eigenangles.
double angle_set_distance(const RVector& a, const RVector& b) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        double best = 2.0 * pi;
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            const double d = std::abs(std::remainder(a[i] - b[j], 2.0 * pi));
            best = std::min(best, d);
        }
        worst = std::max(worst, best);
    }
    return worst;
}

RVector hermitian_spectrum(const CMatrix& m) {
    return matcore::hermitian_eigenvalues((m + m.adjoint()) * 0.5);
}

std::vector<MuWeights> reference_weights() {
    return {MuWeights{{1, 1.0}, {-1, -1.0}}, MuWeights{{2, 1.0}}, MuWeights{{1, 1.0}, {3, -2.0}}};
}

BorelElement target_nu(Context& ctx, Coupling x, int n) {
    BorelElement nu = reduction::nu(x, n);
    if (ctx.options.mutation != Mutation::nu_perturbed || n < 2) {
        return nu;
    }
    CMatrix m = nu.mat();
    const int i = ctx.rng.integer(0, n - 2);
    const int j = ctx.rng.integer(i + 1, n - 1);
    m(i, j) += 1e-3;
    return BorelElement::from(std::move(m));
}

std::vector<double> unit_grid(int samples) {
    std::vector<double> t(samples);
    for (int i = 0; i < samples; ++i) {
        t[i] = double(i) / (samples - 1);
    }
    return t;
}

// Flow comparisons start away from collisions and from the alcove walls so no angle wraps
// through 0 during t in [0, 1].
// Extended precision for oracles on ill-conditioned matrices.
using LongComplex = std::complex<long double>;
using LongMatrix = Eigen::Matrix<LongComplex, Eigen::Dynamic, Eigen::Dynamic>;

PhasePoint flow_start(Sampler& rng, int n) {
    return rng.phase_point(n, 0.5, 0.5, 0.35);
}

// RK4 truncation at step 1e-3 grows quickly with |x| for n = 4; above |x| ~ 2 it exceeds 1e-5.
Coupling flow_coupling(Sampler& rng) {
    return rng.coupling(1.5);
}

const MuWeights rs_weights{{1, 1.0}, {-1, -1.0}};

struct EngineRun {
    dynamics::Trajectory dbl;
    dynamics::Trajectory proj;
    dynamics::Trajectory ode;
};

double max_state_deviation(const std::vector<RVector>& a, const std::vector<RVector>& b) {
    if (a.size() != b.size()) {
        return std::numeric_limits<double>::infinity();
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, (a[i] - b[i]).cwiseAbs().maxCoeff());
    }
    return worst;
}

std::vector<Property> build_properties() {
    std::vector<Property> props;

    // ---- matcore ----
    props.push_back({"matcore", "uu_dagger_factor inverts b -> b b^dagger", 0, 1e-10, [](Context& ctx) {
                         Measurement m;
                         for (int n = 2; n <= ctx.options.n_max; ++n) {
                             for (int s = 0; s < 20; ++s) {
                                 const BorelElement b = ctx.rng.borel(n);
                                 const CMatrix h = b.mat() * b.mat().adjoint();
                                 m.add(rel(matcore::uu_dagger_factor(h).mat(), b.mat()));
                             }
                         }
                         return m;
                     }});
    props.push_back({"matcore", "Iwasawa left/right reconstruction", 0, 1e-10, [](Context& ctx) {
                         Measurement m;
                         for (int s = 0; s < 100; ++s) {
                             const int n = 2 + s % (ctx.options.n_max - 1);
                             const CMatrix k = ctx.rng.complex_gaussian(n);
                             const double scale = k.norm();
                             const auto l = matcore::iwasawa_left(k);
                             const auto r = matcore::iwasawa_right(k);
                             m.add((l.borel.mat() * l.unitary.inverse().mat() - k).norm() / scale);
                             m.add((r.unitary.mat() * r.borel.inverse().mat() - k).norm() / scale);
                         }
                         return m;
                     }});
    props.push_back({"matcore", "unitary_eig reconstruction", 0, 1e-9, [](Context& ctx) {
                         Measurement m;
                         for (int n = 2; n <= ctx.options.n_max; ++n) {
                             for (int s = 0; s < 10; ++s) {
                                 const UnitaryMatrix u = ctx.rng.unitary(n);
                                 const auto e = matcore::unitary_eig(u);
                                 const CMatrix d = UnitaryMatrix::diagonal_phases(e.angles).mat();
                                 m.add((e.vectors.mat() * d * e.vectors.mat().adjoint() - u.mat()).norm());
                             }
                         }
                         return m;
                     }});
    props.push_back({"matcore", "unitary_eig spectrum invariant under conjugation", 0, 1e-8, [](Context& ctx) {
                         Measurement m;
                         for (int n = 2; n <= ctx.options.n_max; ++n) {
                             for (int s = 0; s < 10; ++s) {
                                 const UnitaryMatrix u = ctx.rng.unitary(n);
                                 const UnitaryMatrix w = ctx.rng.unitary(n);
                                 const auto a = matcore::unitary_eig(u);
                                 const auto b = matcore::unitary_eig(w * u * w.inverse());
                                 m.add(angle_set_distance(a.angles, b.angles));
                             }
                         }
                         return m;
                     }});
    props.push_back({"matcore", "herm_exp group law", 0, 1e-9, [](Context& ctx) {
                         Measurement m;
                         for (int n = 2; n <= ctx.options.n_max; ++n) {
                             for (int i = 0; i < 10; ++i) {
                                 const CMatrix h = ctx.rng.hermitian(n);
                                 const double s = ctx.rng.uniform(-2, 2), t = ctx.rng.uniform(-2, 2);
                                 const CMatrix lhs = matcore::herm_exp(h, s).mat() * matcore::herm_exp(h, t).mat();
                                 m.add((lhs - matcore::herm_exp(h, s + t).mat()).norm());
                             }
                         }
                         return m;
                     }});

    // ---- double ----
    auto for_double_samples = [](Context& ctx, const std::function<void(int, const DoublePoint&, Measurement&)>& body) {
        Measurement m;
        for (int n = 2; n <= ctx.n_cap(6); ++n) {
            for (int s = 0; s < 8; ++s) {
                // Flow phases scale like sigma_min^{-6} for the cubic weight; keep K tame.
                body(n, DoublePoint::from(ctx.rng.invertible(n, 0.1)), m);
            }
        }
        return m;
    };
    props.push_back({"double", "momentum Lambda_L conserved by free flows", 0, 1e-9, [=](Context& ctx) {
                         return for_double_samples(ctx, [&](int, const DoublePoint& k, Measurement& m) {
                             const CMatrix b0 = matcore::iwasawa_left(k.mat()).borel.mat();
                             for (const auto& mu : reference_weights()) {
                                 const auto kt = heisenberg::free_flow(k, mu, 0.7);
                                 m.add(rel(matcore::iwasawa_left(kt.mat()).borel.mat(), b0));
                             }
                         });
                     }});
    props.push_back({"double", "free Lax spectrum conserved by free flows", 0, 1e-9, [=](Context& ctx) {
                         return for_double_samples(ctx, [&](int, const DoublePoint& k, Measurement& m) {
                             const RVector s0 = hermitian_spectrum(heisenberg::lax_free(k));
                             for (const auto& mu : reference_weights()) {
                                 const auto kt = heisenberg::free_flow(k, mu, 1.3);
                                 m.add(rel_vec(hermitian_spectrum(heisenberg::lax_free(kt)), s0));
                             }
                         });
                     }});
    props.push_back({"double", "moment map conserved by free flows", 0, 1e-9, [=](Context& ctx) {
                         return for_double_samples(ctx, [&](int, const DoublePoint& k, Measurement& m) {
                             const CMatrix l0 = heisenberg::moment_map(k).mat();
                             for (const auto& mu : reference_weights()) {
                                 const auto kt = heisenberg::free_flow(k, mu, 0.9);
                                 m.add(rel(heisenberg::moment_map(kt).mat(), l0));
                             }
                         });
                     }});
    props.push_back({"double", "moment map equivariance under quasi-adjoint action", 8, 1e-9, [=](Context& ctx) {
                         return for_double_samples(ctx, [&](int n, const DoublePoint& k, Measurement& m) {
                             const UnitaryMatrix g = ctx.rng.unitary(n);
                             const CMatrix moved = heisenberg::moment_map(heisenberg::quasi_adjoint(g, k)).mat();
                             const CMatrix base = heisenberg::moment_map(k).mat();
                             m.add(rel(moved * moved.adjoint(), g.mat() * base * base.adjoint() * g.mat().adjoint()));
                         });
                     }});
    props.push_back({"double", "free flow composition", 0, 1e-9, [=](Context& ctx) {
                         return for_double_samples(ctx, [&](int, const DoublePoint& k, Measurement& m) {
                             const double s = ctx.rng.uniform(-1, 1), t = ctx.rng.uniform(-1, 1);
                             for (const auto& mu : reference_weights()) {
                                 const auto two = heisenberg::free_flow(heisenberg::free_flow(k, mu, s), mu, t);
                                 m.add(rel(two.mat(), heisenberg::free_flow(k, mu, s + t).mat()));
                             }
                         });
                     }});
    props.push_back({"double", "free flows commute", 7, 1e-8, [=](Context& ctx) {
                         return for_double_samples(ctx, [&](int, const DoublePoint& k, Measurement& m) {
                             const auto mus = reference_weights();
                             const double s = ctx.rng.uniform(-1, 1), t = ctx.rng.uniform(-1, 1);
                             for (std::size_t a = 0; a < mus.size(); ++a) {
                                 const auto& mu = mus[a];
                                 const auto& nu = mus[(a + 1) % mus.size()];
                                 const auto st = heisenberg::free_flow(heisenberg::free_flow(k, mu, s), nu, t);
                                 const auto ts = heisenberg::free_flow(heisenberg::free_flow(k, nu, t), mu, s);
                                 m.add(rel(st.mat(), ts.mat()));
                             }
                         });
                     }});
    props.push_back({"double", "H_mu invariant under quasi-adjoint action", 0, 1e-10, [=](Context& ctx) {
                         return for_double_samples(ctx, [&](int n, const DoublePoint& k, Measurement& m) {
                             const UnitaryMatrix g = ctx.rng.unitary(n);
                             const DoublePoint moved = heisenberg::quasi_adjoint(g, k);
                             for (const auto& mu : reference_weights()) {
                                 m.add(rel_scalar(heisenberg::hamiltonian_free(moved, mu),
                                                  heisenberg::hamiltonian_free(k, mu)));
                             }
                         });
                     }});
    props.push_back({"double", "quasi-adjoint action property", 0, 1e-9, [=](Context& ctx) {
                         return for_double_samples(ctx, [&](int n, const DoublePoint& k, Measurement& m) {
                             const UnitaryMatrix g = ctx.rng.unitary(n), h = ctx.rng.unitary(n);
                             const auto lhs = heisenberg::quasi_adjoint(g * h, k);
                             const auto rhs = heisenberg::quasi_adjoint(g, heisenberg::quasi_adjoint(h, k));
                             m.add(rel(lhs.mat(), rhs.mat()));
                         });
                     }});

    // ---- reduction ----
    props.push_back({"reduction", "constraint identity n T n^-1 T^-1 = nu(x)", 1, 1e-9, [](Context& ctx) {
                         Measurement m;
                         for (int n = 2; n <= ctx.options.n_max; ++n) {
                             for (int s = 0; s < 50; ++s) {
                                 const AlcovePoint q = ctx.rng.alcove(n);
                                 const Coupling x = ctx.rng.coupling();
                                 const CMatrix nt = reduction::n_matrix(q, x);
                                 const CMatrix t = q.torus().mat();
                                 const CMatrix nt_inv = nt.triangularView<Eigen::UnitUpper>().solve(
                                     CMatrix::Identity(n, n));
                                 const CMatrix lhs = nt * t * nt_inv * t.adjoint();
                                 m.add(rel(lhs, target_nu(ctx, x, n).mat()));
                             }
                         }
                         return m;
                     }});
    props.push_back({"reduction", "closed-form inverse of n(T)", 0, 1e-10, [](Context& ctx) {
                         Measurement m;
                         for (int n = 2; n <= ctx.options.n_max; ++n) {
                             for (int s = 0; s < 20; ++s) {
                                 const AlcovePoint q = ctx.rng.alcove(n);
                                 const Coupling x = ctx.rng.coupling();
                                 const CMatrix nt = reduction::n_matrix(q, x);
                                 const CMatrix inv = reduction::n_matrix_inverse(q, x);
                                 m.add((inv * nt - CMatrix::Identity(n, n)).norm() / std::max(1.0, nt.norm()));
                             }
                         }
                         return m;
                     }});
    auto relation_couplings = [] { return std::array<double, 6>{0.3, -0.3, 1.0, -1.0, 2.5, -2.5}; };
    props.push_back({"reduction", "exponentiated nu nu^dagger relation", 2, 1e-10, [=](Context& ctx) {
                         Measurement m;
                         for (int n = 2; n <= ctx.options.n_max; ++n) {
                             for (double xv : relation_couplings()) {
                                 const Coupling x(xv);
                                 const CMatrix nu = target_nu(ctx, x, n).mat();
                                 const CVector v = reduction::kks_vector(x, n).cast<Complex>();
                                 const CMatrix rhs = std::exp(-xv) * (CMatrix::Identity(n, n) +
                                                                      std::expm1(n * xv) / n * v * v.adjoint());
                                 m.add(rel(nu * nu.adjoint(), rhs));
                             }
                         }
                         return m;
                     }});
    props.push_back({"reduction", "determinant-minor solve reproduces v(x)", 2, 1e-9, [=](Context& ctx) {
                         Measurement m;
                         for (int n = 2; n <= ctx.options.n_max; ++n) {
                             for (double xv : relation_couplings()) {
                                 const Coupling x(xv);
                                 // nu nu^dagger has condition number ~ e^{n|x|}; the minors cancel
                                 // catastrophically in double precision.
                                 const LongMatrix nu = target_nu(ctx, x, n).mat().cast<LongComplex>();
                                 const LongMatrix h = nu * nu.adjoint();
                                 // det of H with the first k rows and columns deleted; the empty minor is 1.
                                 auto minor_det = [&](int k) -> long double {
                                     return k >= n ? 1.0L : h.bottomRightCorner(n - k, n - k).determinant().real();
                                 };
                                 const RVector v = reduction::kks_vector(x, n);
                                 const long double xl = xv;
                                 for (int k = 1; k <= n; ++k) {
                                     const long double v2 = n / std::expm1(n * xl) * std::exp((n - k) * xl) *
                                                            (std::exp(xl) * minor_det(k - 1) - minor_det(k));
                                     m.add(static_cast<double>(std::abs(std::sqrt(std::max(0.0L, v2)) - v[k - 1])));
                                 }
                             }
                         }
                         return m;
                     }});
    props.push_back({"reduction", "logarithmic nu nu^dagger relation", 0, 1e-9, [=](Context& ctx) {
                         Measurement m;
                         for (int n = 2; n <= ctx.options.n_max; ++n) {
                             for (double xv : relation_couplings()) {
                                 const Coupling x(xv);
                                 const LongMatrix nu = reduction::nu(x, n).mat().cast<LongComplex>();
                                 const LongMatrix v = reduction::kks_vector(x, n).cast<LongComplex>();
                                 const LongMatrix rhs =
                                     static_cast<long double>(xv) * (v * v.adjoint() - LongMatrix::Identity(n, n));
                                 Eigen::SelfAdjointEigenSolver<LongMatrix> eig(nu * nu.adjoint());
                                 const LongMatrix log = eig.eigenvectors() *
                                                        eig.eigenvalues().array().log().matrix().cast<LongComplex>().asDiagonal() *
                                                        eig.eigenvectors().adjoint();
                                 m.add(static_cast<double>((log - rhs).norm() / std::max(1.0L, rhs.norm())));
                             }
                         }
                         return m;
                     }});
    props.push_back({"reduction", "cross-formula Lax agreement", 3, 1e-9, [](Context& ctx) {
                         Measurement m;
                         const int top = ctx.n_cap(6);
                         for (int s = 0; s < 100; ++s) {
                             const int n = 2 + s % (top - 1);
                             const PhasePoint pt = ctx.rng.phase_point(n);
                             const Coupling x = ctx.rng.coupling();
                             const CMatrix reduced = reduction::lax_reduced(pt, x, ctx.convention());
                             const CMatrix components = reduction::lax_components(pt, x);
                             const UnitaryMatrix gamma = reduction::gamma_phases(pt.alcove(), x);
                             const CMatrix conjugated = gamma.mat() * reduction::rs_lax(pt, x) * gamma.inverse().mat();
                             m.add(std::max({rel(reduced, components), rel(components, conjugated),
                                             rel(reduced, conjugated)}));
                         }
                         return m;
                     }});
    props.push_back({"reduction", "RS Lax matrix is Hermitian", 0, 1e-10, [](Context& ctx) {
                         Measurement m;
                         for (int n = 2; n <= ctx.n_cap(6); ++n) {
                             for (int s = 0; s < 10; ++s) {
                                 const CMatrix l = reduction::rs_lax(ctx.rng.phase_point(n), ctx.rng.coupling());
                                 m.add(rel(l, l.adjoint()));
                             }
                         }
                         return m;
                     }});
    props.push_back({"reduction", "RS Lax spectrum equals free Lax spectrum on the slice", 4, 1e-9, [](Context& ctx) {
                         Measurement m;
                         for (int n = 2; n <= ctx.n_cap(6); ++n) {
                             for (int s = 0; s < 10; ++s) {
                                 const PhasePoint pt = ctx.rng.phase_point(n);
                                 const Coupling x = ctx.rng.coupling();
                                 const RVector rs = hermitian_spectrum(reduction::rs_lax(pt, x));
                                 const RVector free =
                                     hermitian_spectrum(heisenberg::lax_free(reduction::slice_point(pt, x)));
                                 m.add(rel_vec(rs, free));
                             }
                         }
                         return m;
                     }});
    props.push_back({"reduction", "reduced Hamiltonian equals free Hamiltonian on the slice", 4, 1e-9,
                     [](Context& ctx) {
                         Measurement m;
                         for (int n = 2; n <= ctx.n_cap(6); ++n) {
                             for (int s = 0; s < 10; ++s) {
                                 const PhasePoint pt = ctx.rng.phase_point(n);
                                 const Coupling x = ctx.rng.coupling();
                                 const DoublePoint k = reduction::slice_point(pt, x);
                                 for (const auto& mu : reference_weights()) {
                                     m.add(rel_scalar(reduction::reduced_hamiltonian(pt, x, mu),
                                                      heisenberg::hamiltonian_free(k, mu)));
                                 }
                             }
                         }
                         return m;
                     }});
    props.push_back({"reduction", "RS Hamiltonian equals (tr L + tr L^-1) / 2", 0, 1e-9, [](Context& ctx) {
                         Measurement m;
                         for (int n = 2; n <= ctx.n_cap(6); ++n) {
                             for (int s = 0; s < 10; ++s) {
                                 const PhasePoint pt = ctx.rng.phase_point(n);
                                 const Coupling x = ctx.rng.coupling();
                                 const CMatrix l = reduction::rs_lax(pt, x);
                                 const double traces = 0.5 * (l.trace().real() + l.inverse().trace().real());
                                 m.add(rel_scalar(reduction::rs_hamiltonian(pt, x), traces));
                             }
                         }
                         return m;
                     }});
    props.push_back({"reduction", "Iwasawa maps and moment map on the slice", 0, 1e-9, [](Context& ctx) {
                         Measurement m;
                         for (int n = 2; n <= ctx.n_cap(6); ++n) {
                             for (int s = 0; s < 10; ++s) {
                                 const PhasePoint pt = ctx.rng.phase_point(n);
                                 const Coupling x = ctx.rng.coupling();
                                 const DoublePoint k = reduction::slice_point(pt, x);
                                 const auto maps = heisenberg::iwasawa_maps(k);
                                 const CMatrix nt = reduction::n_matrix(pt.alcove(), x);
                                 const CMatrix a =
                                     reduction::zeta(pt, x).array().exp().matrix().cast<Complex>().asDiagonal();
                                 const CMatrix t = pt.alcove().torus().mat();
                                 m.add(rel(maps.lambda_left.mat(), nt * a));
                                 m.add(rel(maps.xi_right.mat(), t));
                                 m.add(rel(maps.xi_left.mat(), t.adjoint()));
                                 m.add(rel(maps.lambda_right.mat(),
                                           t * a.inverse() * reduction::n_matrix_inverse(pt.alcove(), x) * t.adjoint()));
                                 m.add(rel(heisenberg::moment_map(k).mat(), reduction::nu(x, n).mat()));
                             }
                         }
                         return m;
                     }});
    props.push_back({"reduction", "decompose_to_slice is the identity on the slice", 0, 1e-8, [](Context& ctx) {
                         Measurement m;
                         for (int n = 2; n <= ctx.n_cap(6); ++n) {
                             for (int s = 0; s < 10; ++s) {
                                 const PhasePoint pt = ctx.rng.phase_point(n);
                                 const Coupling x = ctx.rng.coupling();
                                 const auto d = reduction::decompose_to_slice(reduction::slice_point(pt, x), x);
                                 m.add(std::max((d.point.q() - pt.q()).cwiseAbs().maxCoeff(),
                                                (d.point.p() - pt.p()).cwiseAbs().maxCoeff()));
                             }
                         }
                         return m;
                     }});
    props.push_back({"reduction", "decompose_to_slice reconstructs its input", 0, 1e-7, [](Context& ctx) {
                         Measurement m;
                         for (int n = 2; n <= ctx.n_cap(6); ++n) {
                             for (int s = 0; s < 10; ++s) {
                                 const PhasePoint pt = ctx.rng.phase_point(n);
                                 const Coupling x = ctx.rng.coupling();
                                 const DoublePoint k =
                                     heisenberg::quasi_adjoint(ctx.rng.isotropy(x, n), reduction::slice_point(pt, x));
                                 const auto d = reduction::decompose_to_slice(k, x);
                                 const auto back = heisenberg::quasi_adjoint(d.gauge, reduction::slice_point(d.point, x));
                                 m.add(rel(back.mat(), k.mat()));
                             }
                         }
                         return m;
                     }});
    props.push_back({"reduction", "slice representative invariant under isotropy gauge", 8, 1e-7, [](Context& ctx) {
                         Measurement m;
                         for (int n = 2; n <= ctx.n_cap(6); ++n) {
                             for (int s = 0; s < 10; ++s) {
                                 const PhasePoint pt = ctx.rng.phase_point(n);
                                 const Coupling x = ctx.rng.coupling();
                                 const DoublePoint k = reduction::slice_point(pt, x);
                                 const DoublePoint moved = heisenberg::quasi_adjoint(ctx.rng.isotropy(x, n), k);
                                 const auto a = reduction::decompose_to_slice(k, x);
                                 const auto b = reduction::decompose_to_slice(moved, x);
                                 m.add(std::max((a.point.q() - b.point.q()).cwiseAbs().maxCoeff(),
                                                (a.point.p() - b.point.p()).cwiseAbs().maxCoeff()));
                             }
                         }
                         return m;
                     }});

    // ---- dynamics ----
    // One shared set of engine runs feeds the agreement and conservation properties.
    auto engine_runs = [](Context& ctx, const std::function<void(const EngineRun&, const PhasePoint&, Coupling,
                                                                 Measurement&)>& body) {
        Measurement m;
        const std::vector<double> times = unit_grid(21);
        for (int n = 2; n <= ctx.n_cap(4); ++n) {
            for (int s = 0; s < 2; ++s) {
                const PhasePoint start = flow_start(ctx.rng, n);
                const Coupling x = flow_coupling(ctx.rng);
                EngineRun run{dynamics::flow_via_double(start, x, rs_weights, times),
                              dynamics::flow_via_projection(start, x, rs_weights, times),
                              dynamics::flow_via_ode(start, x, rs_weights, times)};
                body(run, start, x, m);
            }
        }
        return m;
    };
    auto failed = [](const dynamics::Trajectory& t) { return t.truncated() || t.size() != 21; };
    props.push_back({"dynamics", "projection engine matches double engine (q)", 5, 1e-7, [=](Context& ctx) {
                         return engine_runs(ctx, [&](const EngineRun& r, const PhasePoint&, Coupling, Measurement& m) {
                             m.add(failed(r.dbl) || failed(r.proj) ? std::numeric_limits<double>::infinity()
                                                                   : max_state_deviation(r.dbl.q, r.proj.q));
                         });
                     }});
    props.push_back({"dynamics", "ODE engine matches double engine (q, p)", 5, 1e-5, [=](Context& ctx) {
                         return engine_runs(ctx, [&](const EngineRun& r, const PhasePoint&, Coupling, Measurement& m) {
                             if (failed(r.dbl) || failed(r.ode)) {
                                 m.add(std::numeric_limits<double>::infinity());
                                 return;
                             }
                             m.add(std::max(max_state_deviation(r.dbl.q, r.ode.q),
                                            max_state_deviation(r.dbl.p, r.ode.p)));
                         });
                     }});
    props.push_back({"dynamics", "moment map residual along double engine", 6, 1e-7, [=](Context& ctx) {
                         return engine_runs(ctx, [&](const EngineRun& r, const PhasePoint&, Coupling, Measurement& m) {
                             if (failed(r.dbl)) {
                                 m.add(std::numeric_limits<double>::infinity());
                             }
                             for (double res : r.dbl.constraint_residual) {
                                 m.add(res);
                             }
                         });
                     }});
    props.push_back({"dynamics", "energy drift along double engine", 6, 1e-8, [=](Context& ctx) {
                         return engine_runs(ctx, [&](const EngineRun& r, const PhasePoint&, Coupling, Measurement& m) {
                             for (double e : r.dbl.energy) {
                                 m.add(rel_scalar(e, r.dbl.energy.front()));
                             }
                         });
                     }});
    props.push_back({"dynamics", "RS Lax spectrum drift along double engine", 6, 1e-8, [=](Context& ctx) {
                         return engine_runs(ctx, [&](const EngineRun& r, const PhasePoint&, Coupling, Measurement& m) {
                             m.add(dynamics::spectrum_drift(r.dbl));
                         });
                     }});
    props.push_back({"dynamics", "Lambda_L conserved along double engine", 6, 1e-9, [](Context& ctx) {
                         Measurement m;
                         for (int n = 2; n <= ctx.n_cap(4); ++n) {
                             for (int s = 0; s < 2; ++s) {
                                 const PhasePoint start = flow_start(ctx.rng, n);
                                 const Coupling x = flow_coupling(ctx.rng);
                                 const DoublePoint k0 = reduction::slice_point(start, x);
                                 const CMatrix b0 = matcore::iwasawa_left(k0.mat()).borel.mat();
                                 for (double t : unit_grid(21)) {
                                     const DoublePoint kt = heisenberg::free_flow(k0, rs_weights, t);
                                     m.add(rel(matcore::iwasawa_left(kt.mat()).borel.mat(), b0));
                                 }
                             }
                         }
                         return m;
                     }});
    props.push_back({"dynamics", "energy drift along ODE engine", 6, 1e-6, [=](Context& ctx) {
                         return engine_runs(ctx, [&](const EngineRun& r, const PhasePoint&, Coupling, Measurement& m) {
                             for (double e : r.ode.energy) {
                                 m.add(rel_scalar(e, r.ode.energy.front()));
                             }
                         });
                     }});
    props.push_back({"dynamics", "RS Lax spectrum drift along ODE engine", 0, 1e-5, [=](Context& ctx) {
                         return engine_runs(ctx, [&](const EngineRun& r, const PhasePoint&, Coupling, Measurement& m) {
                             m.add(dynamics::spectrum_drift(r.ode));
                         });
                     }});
    props.push_back({"dynamics", "reduced Hamiltonians Poisson-commute", 7, 1e-5, [](Context& ctx) {
                         Measurement m;
                         const int n = ctx.n_cap(3);
                         const MuWeights second{{2, 1.0}};
                         for (int s = 0; s < 50; ++s) {
                             const PhasePoint pt = ctx.rng.phase_point(n, 0.5, 0.5, 0.05);
                             const Coupling x = ctx.rng.coupling();
                             auto h1 = [&](const PhasePoint& z) { return reduction::reduced_hamiltonian(z, x, rs_weights); };
                             auto h2 = [&](const PhasePoint& z) { return reduction::reduced_hamiltonian(z, x, second); };
                             m.add(std::abs(dynamics::poisson_bracket(h1, h2, pt)));
                         }
                         return m;
                     }});
    props.push_back({"dynamics", "bracket canonical pairs, antisymmetry and Leibniz rule", 0, 1e-6, [](Context& ctx) {
                         Measurement m;
                         for (int n = 2; n <= ctx.n_cap(4); ++n) {
                             for (int s = 0; s < 5; ++s) {
                                 const PhasePoint pt = ctx.rng.phase_point(n, 1.0, 0.3, 0.05);
                                 const Coupling x = ctx.rng.coupling();
                                 auto q1 = [](const PhasePoint& z) { return z.q()[0]; };
                                 auto p1 = [](const PhasePoint& z) { return z.p()[0]; };
                                 auto f = [&](const PhasePoint& z) { return reduction::rs_hamiltonian(z, x); };
                                 auto g = [](const PhasePoint& z) { return std::sin(z.q()[0]) * z.p().sum(); };
                                 auto h = [](const PhasePoint& z) { return z.q().squaredNorm() + std::cosh(z.p()[0]); };
                                 auto gh = [&](const PhasePoint& z) { return g(z) * h(z); };
                                 m.add(std::abs(dynamics::poisson_bracket(q1, p1, pt) - 1.0));
                                 m.add(std::abs(dynamics::poisson_bracket(f, g, pt) + dynamics::poisson_bracket(g, f, pt)));
                                 const double lhs = dynamics::poisson_bracket(f, gh, pt);
                                 const double rhs = dynamics::poisson_bracket(f, g, pt) * h(pt) +
                                                    g(pt) * dynamics::poisson_bracket(f, h, pt);
                                 m.add(rel_scalar(lhs, rhs));
                             }
                         }
                         return m;
                     }});
    props.push_back({"dynamics", "projection seed L(0) and RS Lax give identical positions", 0, 1e-9,
                     [](Context& ctx) {
                         Measurement m;
                         const std::vector<double> times = unit_grid(11);
                         for (int n = 2; n <= ctx.n_cap(4); ++n) {
                             for (int s = 0; s < 3; ++s) {
                                 const PhasePoint start = flow_start(ctx.rng, n);
                                 const Coupling x = flow_coupling(ctx.rng);
                                 const auto a = dynamics::flow_via_projection(start, x, rs_weights, times);
                                 const auto b = dynamics::flow_via_projection(start, x, rs_weights, times, {},
                                                                              dynamics::ProjectionSeed::reduced_lax);
                                 m.add(max_state_deviation(a.q, b.q));
                             }
                         }
                         return m;
                     }});
    return props;
}

PropertyResult evaluate(const Property& prop, std::size_t index, const Options& options) {
    // Each property owns its stream so filtering never changes the samples it sees.
    Sampler rng(options.seed * 0x9E3779B97F4A7C15ULL + index);
    Context ctx{options, rng};
    PropertyResult result{prop.module, prop.name, prop.criterion, 0.0,
                          options.strict ? prop.tolerance / 2.0 : prop.tolerance, 0, false};
    try {
        const Measurement m = prop.run(ctx);
        result.worst = m.worst;
        result.samples = m.samples;
        result.passed = m.samples > 0 && m.worst < result.tolerance;
    } catch (const std::exception&) {
        result.worst = std::numeric_limits<double>::infinity();
        result.passed = false;
    }
    return result;
}

void check_options(const Options& options) {
    if (options.n_max < 2 || options.n_max > 8) {
        throw Error(ErrorCode::invalid_argument, "verify: n_max must lie in [2, 8]");
    }
}

Report run_filtered(const Options& options, const std::function<bool(const Property&)>& keep) {
    check_options(options);
    const auto props = build_properties();
    Report report;
    for (std::size_t i = 0; i < props.size(); ++i) {
        if (keep(props[i])) {
            report.results.push_back(evaluate(props[i], i, options));
        }
    }
    return report;
}

} // namespace

const char* to_string(Mutation m) noexcept {
    switch (m) {
    case Mutation::none: return "none";
    case Mutation::zeta_half: return "zeta-half";
    case Mutation::zeta_flipped_signs: return "zeta-flipped-signs";
    case Mutation::nu_perturbed: return "nu-perturbed";
    }
    return "unknown";
}

bool Report::all_passed() const noexcept {
    return std::all_of(results.begin(), results.end(), [](const PropertyResult& r) { return r.passed; });
}

Report run_suite(const Options& options) {
    return run_filtered(options, [](const Property&) { return true; });
}

Report run_criterion(int id, const Options& options) {
    if (id < 1 || id > 8) {
        throw Error(ErrorCode::invalid_argument, "run_criterion: criterion id must lie in [1, 8]");
    }
    return run_filtered(options, [id](const Property& p) { return p.criterion == id; });
}

Report run_mutation_checks(const Options& options) {
    struct Case {
        Mutation mutation;
        int criterion;
    };
    constexpr std::array<Case, 3> cases{{{Mutation::zeta_flipped_signs, 3},
                                         {Mutation::zeta_half, 3},
                                         {Mutation::nu_perturbed, 1}}};
    Report report;
    for (const auto& c : cases) {
        Options mutated = options;
        mutated.mutation = c.mutation;
        const Report inner = run_criterion(c.criterion, mutated);
        PropertyResult r{"acceptance",
                         std::string("mutation ") + to_string(c.mutation) + " detected by criterion " +
                             std::to_string(c.criterion),
                         9, 0.0, 0.0, 0, false};
        for (const auto& p : inner.results) {
            r.worst = std::max(r.worst, p.worst);
            r.tolerance = p.tolerance;
            r.samples += p.samples;
        }
        r.passed = !inner.all_passed();
        report.results.push_back(std::move(r));
    }
    return report;
}

} // namespace plrs::verify
