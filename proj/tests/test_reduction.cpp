#include "doctest.h"
#include "support.hpp"

#include "plrs/heisenberg.hpp"
#include "plrs/reduction.hpp"

using namespace plrs;
using test::CMatrix;

namespace {

double pair(double a, double b, double x) {
    return 1.0 + std::pow(std::sinh(x / 2.0), 2) / std::pow(std::sin(a - b), 2);
}

} // namespace

TEST_CASE("Coupling") {
    CHECK_NOTHROW(Coupling(-0.3));
    CHECK_ERROR_CODE(Coupling(0.0), ErrorCode::invalid_argument);
}

TEST_CASE("AlcovePoint") {
    CHECK_NOTHROW(AlcovePoint::from(test::vec({2.0, 1.0, 0.0})));
    CHECK_ERROR_CODE(AlcovePoint::from(test::vec({1.0, 2.0})), ErrorCode::degenerate_alcove);
    CHECK_ERROR_CODE(AlcovePoint::from(test::vec({1.0, 1.0})), ErrorCode::degenerate_alcove);
    CHECK_ERROR_CODE(AlcovePoint::from(test::vec({test::pi, 1.0})), ErrorCode::invalid_argument);
    CHECK_ERROR_CODE(AlcovePoint::from(test::vec({1.0, -0.1})), ErrorCode::invalid_argument);
    // q_1 - q_n close to pi collides through the wrap.
    CHECK_ERROR_CODE(AlcovePoint::from(test::vec({test::pi - 1e-10, 1.0, 0.0})), ErrorCode::degenerate_alcove);
    const auto a = AlcovePoint::from(test::vec({2.5, 1.0}));
    CHECK(a.min_gap() == doctest::Approx(1.5));
    CHECK(AlcovePoint::from(test::vec({3.0, 0.5})).min_gap() == doctest::Approx(test::pi - 2.5));
    CHECK(std::abs(a.torus().mat()(0, 0) - std::polar(1.0, 5.0)) < 1e-15);
}

TEST_CASE("nu") {
    CHECK(reduction::nu(Coupling(0.7), 1).mat()(0, 0) == Complex(1.0, 0.0));
    const CMatrix nu = reduction::nu(Coupling(test::two_ln2), 3).mat();
    CMatrix expected(3, 3);
    expected << 1.0, 1.5, 3.0, 0.0, 1.0, 1.5, 0.0, 0.0, 1.0;
    CHECK(test::residual(nu, expected) < 1e-14);
}

TEST_CASE("kks_vector") {
    CHECK(reduction::kks_vector(Coupling(0.4), 1)[0] == doctest::Approx(1.0));
    const RVector v = reduction::kks_vector(Coupling(test::two_ln2), 2);
    CHECK(v[0] == doctest::Approx(std::sqrt(8.0 / 5.0)));
    CHECK(v[1] == doctest::Approx(std::sqrt(2.0 / 5.0)));
    for (double x : {-2.5, -0.3, 1.0, 2.5}) {
        const RVector w = reduction::kks_vector(Coupling(x), 6);
        CHECK(w.squaredNorm() == doctest::Approx(6.0).epsilon(1e-12));
        CHECK(w.minCoeff() > 0.0);
    }
}

TEST_CASE("nu nu^dagger relation") {
    for (int n = 2; n <= 6; ++n) {
        for (double x : {-1.0, 0.3, 2.5}) {
            const CMatrix nu = reduction::nu(Coupling(x), n).mat();
            const CVector v = reduction::kks_vector(Coupling(x), n).cast<Complex>();
            const CMatrix rhs =
                std::exp(-x) * (CMatrix::Identity(n, n) + std::expm1(n * x) / n * v * v.adjoint());
            CHECK(matcore::relative_residual(nu * nu.adjoint(), rhs) < 1e-10);
        }
    }
}

TEST_CASE("n_matrix") {
    const Coupling x(0.8);
    CHECK(reduction::n_matrix(AlcovePoint::from(test::vec({1.1})), x)(0, 0) == Complex(1.0, 0.0));

    SUBCASE("n = 2 entry") {
        const auto q = AlcovePoint::from(test::vec({2.1, 0.4}));
        const CMatrix t = q.torus().mat();
        const Complex expected = 2.0 * std::sinh(0.4) * t(1, 1) / (t(1, 1) - t(0, 0));
        CHECK(std::abs(reduction::n_matrix(q, x)(0, 1) - expected) < 1e-14);
    }
    SUBCASE("constraint identity and component recurrence") {
        test::Rng rng(20);
        const auto q = AlcovePoint::from(rng.alcove(4));
        const CMatrix n = reduction::n_matrix(q, x);
        const CMatrix t = q.torus().mat();
        CHECK(test::residual(n * t * n.inverse() * t.adjoint(), reduction::nu(x, 4).mat()) < 1e-9);
        const double xv = x.value();
        double worst = 0.0;
        for (int j = 0; j < 4; ++j) {
            for (int k = 1; j + k < 4; ++k) {
                const Complex lhs = (1.0 - t(j, j) / t(j + k, j + k)) * n(j, j + k);
                Complex rhs = 0.0;
                for (int s = 1; s <= k; ++s) {
                    rhs += -std::expm1(-xv) * std::exp(s * xv / 2.0) * t(j + s, j + s) * n(j + s, j + k) /
                           t(j + k, j + k);
                }
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        }
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("n_matrix_inverse") {
    test::Rng rng(21);
    CHECK(reduction::n_matrix_inverse(AlcovePoint::from(test::vec({0.3})), Coupling(1.0))(0, 0) == Complex(1.0, 0.0));
    const auto q2 = AlcovePoint::from(rng.alcove(2));
    const Coupling x2(-1.3);
    CHECK(test::residual(reduction::n_matrix(q2, x2) * reduction::n_matrix_inverse(q2, x2), CMatrix::Identity(2, 2)) <
          1e-12);
    const auto q5 = AlcovePoint::from(rng.alcove(5));
    const Coupling x5(0.6);
    const CMatrix numeric = reduction::n_matrix(q5, x5).inverse();
    CHECK((reduction::n_matrix_inverse(q5, x5) - numeric).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("zeta") {
    const Coupling x(1.1);
    const auto one = PhasePoint::from(test::vec({0.9}), test::vec({0.8}));
    CHECK(reduction::zeta(one, x)[0] == doctest::Approx(-0.4));

    const auto two = PhasePoint::from(test::vec({2.0, 0.5}), test::vec({0.0, 0.0}));
    const RVector z = reduction::zeta(two, x);
    const double expected = 0.25 * std::log(pair(2.0, 0.5, 1.1));
    CHECK(z[0] == doctest::Approx(expected));
    CHECK(z[1] == doctest::Approx(-expected));

    test::Rng rng(22);
    const auto pt = rng.phase_point(4, 1.0);
    const RVector p = reduction::momenta_from_zeta(pt.alcove(), reduction::zeta(pt, x), x);
    CHECK((p - pt.p()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("slice_point") {
    const Coupling x(0.7);
    SUBCASE("n = 1") {
        const auto pt = PhasePoint::from(test::vec({0.5}), test::vec({0.0}));
        const CMatrix k = reduction::slice_point(pt, x).mat();
        CHECK(std::abs(k(0, 0) - std::polar(1.0, -1.0)) < 1e-15);
        CHECK(std::abs(heisenberg::moment_map(DoublePoint::from(k)).mat()(0, 0) - 1.0) < 1e-14);
    }
    SUBCASE("Iwasawa maps on the slice") {
        test::Rng rng(23);
        const auto pt = rng.phase_point(4);
        const auto k = reduction::slice_point(pt, x);
        const CMatrix t = pt.alcove().torus().mat();
        const CMatrix n = reduction::n_matrix(pt.alcove(), x);
        const CMatrix a = reduction::zeta(pt, x).array().exp().matrix().cast<Complex>().asDiagonal();
        const auto maps = heisenberg::iwasawa_maps(k);
        CHECK(test::residual(maps.xi_right.mat(), t) < 1e-9);
        CHECK(test::residual(maps.xi_left.mat(), t.adjoint()) < 1e-9);
        CHECK(test::residual(maps.lambda_left.mat(), n * a) < 1e-9);
        CHECK(test::residual(maps.lambda_right.mat(), t * a.inverse() * n.inverse() * t.adjoint()) < 1e-9);
        CHECK(test::residual(heisenberg::moment_map(k).mat(), reduction::nu(x, 4).mat()) < 1e-8);
    }
}

TEST_CASE("Lax matrices") {
    SUBCASE("n = 1") {
        const auto pt = PhasePoint::from(test::vec({0.7}), test::vec({0.3}));
        const Coupling x(0.5);
        const Complex e = std::exp(0.3);
        CHECK(std::abs(reduction::lax_reduced(pt, x)(0, 0) - e) < 1e-14);
        CHECK(std::abs(reduction::lax_components(pt, x)(0, 0) - e) < 1e-14);
        CHECK(std::abs(reduction::rs_lax(pt, x)(0, 0) - e) < 1e-14);
        CHECK(std::abs(reduction::gamma_phases(pt.alcove(), x).mat()(0, 0) - std::polar(1.0, -0.7)) < 1e-15);
    }
    SUBCASE("weak coupling approaches the identity") {
        const auto pt = PhasePoint::from(test::vec({2.5, 1.5, 0.4}), test::vec({0.0, 0.0, 0.0}));
        const CMatrix l = reduction::lax_reduced(pt, Coupling(1e-6));
        CHECK(test::residual(l, CMatrix::Identity(3, 3)) < 1e-5);
    }
    SUBCASE("diagonal entries") {
        test::Rng rng(24);
        const auto pt = rng.phase_point(4, 1.0);
        const Coupling x(-1.4);
        const CMatrix l = reduction::lax_components(pt, x);
        for (int k = 0; k < 4; ++k) {
            double expected = std::exp(pt.p()[k]);
            for (int m = 0; m < 4; ++m) {
                if (m != k) {
                    expected *= std::sqrt(pair(pt.q()[k], pt.q()[m], x.value()));
                }
            }
            CHECK(std::abs(l(k, k) - expected) < 1e-12 * expected);
        }
    }
    SUBCASE("three routes agree and conjugation by Gamma") {
        test::Rng rng(25);
        for (int n = 2; n <= 6; ++n) {
            const auto pt = rng.phase_point(n, 1.0);
            const Coupling x(rng.uniform(0.3, 2.5) * (n % 2 ? 1.0 : -1.0));
            const CMatrix reduced = reduction::lax_reduced(pt, x);
            const CMatrix components = reduction::lax_components(pt, x);
            const CMatrix gamma = reduction::gamma_phases(pt.alcove(), x).mat();
            const CMatrix rs = reduction::rs_lax(pt, x);
            CHECK(matcore::relative_residual(reduced, components) < 1e-9);
            CHECK(matcore::relative_residual(components, gamma * rs * gamma.adjoint()) < 1e-9);
            CHECK((gamma.diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("RS Lax closed form for n = 2") {
        const double delta = 0.9, x = 1.2;
        const auto pt = PhasePoint::from(test::vec({1.5, 1.5 - delta}), test::vec({0.0, 0.0}));
        const CMatrix rs = reduction::rs_lax(pt, Coupling(x));
        const double root = std::sqrt(pair(1.5, 1.5 - delta, x));
        const Complex off = std::sinh(x / 2.0) / std::sinh(Complex(x / 2.0, delta)) * root;
        CHECK(std::abs(rs(0, 0) - root) < 1e-13);
        CHECK(std::abs(rs(0, 1) - off) < 1e-13);
        CHECK(std::abs(rs(1, 0) - std::conj(off)) < 1e-13);
    }
    SUBCASE("RS form is Hermitian") {
        // Gamma^{-1} L Gamma is Hermitian with positive diagonal; its off-diagonal entries are complex.
        test::Rng rng(26);
        const auto pt = rng.phase_point(3, 1.0);
        const Coupling x(0.9);
        const CMatrix gamma = reduction::gamma_phases(pt.alcove(), x).mat();
        const CMatrix rs = gamma.adjoint() * reduction::lax_components(pt, x) * gamma;
        CHECK(test::residual(rs, rs.adjoint()) < 1e-10);
        CHECK(rs.diagonal().real().minCoeff() > 0.0);
        CHECK(rs.diagonal().imag().cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(rs(0, 1).imag()) > 1e-3);
    }
}

TEST_CASE("Hamiltonians") {
    const Coupling x(1.0);
    CHECK(reduction::rs_hamiltonian(PhasePoint::from(test::vec({0.4}), test::vec({0.0})), x) == doctest::Approx(1.0));
    const double gap = 0.8;
    const auto pt = PhasePoint::from(test::vec({1.0, 1.0 - gap}), test::vec({0.0, 0.0}));
    const double expected = 2.0 * std::sqrt(pair(1.0, 1.0 - gap, 1.0));
    CHECK(reduction::rs_hamiltonian(pt, x) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(reduction::reduced_hamiltonian(pt, x, MuWeights{{1, 1.0}, {-1, -1.0}}) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(reduction::reduced_hamiltonian(pt, x, MuWeights{}) == 0.0);

    test::Rng rng(27);
    const auto p4 = rng.phase_point(4, 1.0);
    const CMatrix l = reduction::rs_lax(p4, Coupling(-0.8));
    CHECK(reduction::rs_hamiltonian(p4, Coupling(-0.8)) ==
          doctest::Approx(0.5 * (l.trace().real() + l.inverse().trace().real())).epsilon(1e-10));

    const auto p3 = rng.phase_point(3, 1.0);
    const Coupling x3(1.7);
    const MuWeights second{{2, 1.0}};
    const CMatrix l3 = reduction::rs_lax(p3, x3);
    const double quarter_trace = 0.25 * (l3 * l3).trace().real();
    CHECK(reduction::reduced_hamiltonian(p3, x3, second) == doctest::Approx(quarter_trace).epsilon(1e-10));
    CHECK(heisenberg::hamiltonian_free(reduction::slice_point(p3, x3), second) ==
          doctest::Approx(quarter_trace).epsilon(1e-9));
}

TEST_CASE("to_alcove") {
    const auto pt = reduction::to_alcove(test::vec({0.2, -0.1, test::pi + 0.5}), test::vec({1.0, 2.0, 3.0}));
    CHECK(pt.q()[0] == doctest::Approx(test::pi - 0.1));
    CHECK(pt.q()[1] == doctest::Approx(0.5));
    CHECK(pt.q()[2] == doctest::Approx(0.2));
    CHECK(pt.p()[0] == 2.0);
    CHECK(pt.p()[1] == 3.0);
    CHECK(pt.p()[2] == 1.0);
}

TEST_CASE("decompose_to_slice") {
    test::Rng rng(28);
    const Coupling x(-1.1);
    const auto pt = rng.phase_point(4, 1.0);
    const auto k = reduction::slice_point(pt, x);

    SUBCASE("identity on the slice") {
        const auto d = reduction::decompose_to_slice(k, x);
        CHECK((d.point.q() - pt.q()).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((d.point.p() - pt.p()).cwiseAbs().maxCoeff() < 1e-8);
        const CMatrix rebuilt = heisenberg::quasi_adjoint(d.gauge, reduction::slice_point(d.point, x)).mat();
        CHECK(test::residual(rebuilt, k.mat()) < 1e-7);
    }
    SUBCASE("gauge-moved input") {
        // Isotropy of nu nu^dagger: a phase on v and a unitary on its orthogonal complement.
        const CVector v = reduction::kks_vector(x, 4).cast<Complex>().normalized();
        const CMatrix proj = v * v.adjoint();
        Eigen::HouseholderQR<CMatrix> qr(CMatrix(CMatrix::Identity(4, 4) - proj));
        const CMatrix u = rng.unitary(4);
        const CMatrix comp = CMatrix::Identity(4, 4) - proj;
        const CMatrix g = comp * u * comp;
        // Polar projection of the compressed unitary onto the unitaries of the complement.
        Eigen::JacobiSVD<CMatrix> svd(g + proj, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const CMatrix iso = svd.matrixU() * svd.matrixV().adjoint() * (comp + std::polar(1.0, 0.4) * proj);
        const auto moved = heisenberg::quasi_adjoint(UnitaryMatrix::from(iso), k);
        const auto d = reduction::decompose_to_slice(moved, x);
        CHECK((d.point.q() - pt.q()).cwiseAbs().maxCoeff() < 1e-7);
        CHECK((d.point.p() - pt.p()).cwiseAbs().maxCoeff() < 1e-7);
        CHECK(test::residual(heisenberg::quasi_adjoint(d.gauge, reduction::slice_point(d.point, x)).mat(),
                             moved.mat()) < 1e-7);
    }
    SUBCASE("constraint violated") {
        CHECK_ERROR_CODE(reduction::decompose_to_slice(DoublePoint::from(rng.invertible(4)), x),
                         ErrorCode::constraint_violated);
    }
}
