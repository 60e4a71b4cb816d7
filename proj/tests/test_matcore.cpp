#include "doctest.h"
#include "support.hpp"

#include "plrs/matcore.hpp"

using namespace plrs;
using test::CMatrix;

TEST_CASE("tolerances must be positive") {
    Tolerances tol;
    CHECK_NOTHROW(tol.validate());
    tol.unitary = 0.0;
    CHECK_ERROR_CODE(tol.validate(), ErrorCode::invalid_argument);
}

TEST_CASE("BorelElement validation") {
    CMatrix m(2, 2);
    m << 1.0, 2.0, 0.0, 3.0;
    CHECK_NOTHROW(BorelElement::from(m));

    CMatrix lower = m;
    lower(1, 0) = 0.1;
    CHECK_ERROR_CODE(BorelElement::from(lower), ErrorCode::invalid_argument);

    CMatrix negative = m;
    negative(0, 0) = -1.0;
    CHECK_ERROR_CODE(BorelElement::from(negative), ErrorCode::invalid_argument);

    CMatrix complex_diagonal = m;
    complex_diagonal(1, 1) = Complex(3.0, 0.5);
    CHECK_ERROR_CODE(BorelElement::from(complex_diagonal), ErrorCode::invalid_argument);

    const auto b = BorelElement::from(m);
    CHECK(test::residual((b * b.inverse()).mat(), CMatrix::Identity(2, 2)) < 1e-14);
}

TEST_CASE("UnitaryMatrix validation") {
    test::Rng rng(1);
    CHECK_NOTHROW(UnitaryMatrix::from(rng.unitary(4)));
    CHECK_ERROR_CODE(UnitaryMatrix::from(2.0 * CMatrix::Identity(3, 3)), ErrorCode::not_unitary);
    const auto d = UnitaryMatrix::diagonal_phases(test::vec({0.0, test::pi}));
    CHECK(std::abs(d.mat()(1, 1) - Complex(-1.0, 0.0)) < 1e-15);
}

TEST_CASE("uu_dagger_factor") {
    SUBCASE("identity") {
        const auto b = matcore::uu_dagger_factor(CMatrix::Identity(3, 3));
        CHECK(test::residual(b.mat(), CMatrix::Identity(3, 3)) < 1e-15);
    }
    SUBCASE("diagonal") {
        CMatrix h = CMatrix::Zero(2, 2);
        h(0, 0) = 4.0;
        h(1, 1) = 9.0;
        const auto b = matcore::uu_dagger_factor(h);
        CHECK(b.mat()(0, 0).real() == doctest::Approx(2.0));
        CHECK(b.mat()(1, 1).real() == doctest::Approx(3.0));
        CHECK(std::abs(b.mat()(0, 1)) < 1e-15);
    }
    SUBCASE("recovers nu for n = 2, x = 2 ln 2") {
        // nu = [[1, 3/2], [0, 1]]
        CMatrix nu(2, 2);
        nu << 1.0, 1.5, 0.0, 1.0;
        const auto b = matcore::uu_dagger_factor(nu * nu.adjoint());
        CHECK(test::residual(b.mat(), nu) < 1e-14);
        CHECK(b.mat()(0, 1).real() == doctest::Approx(1.5));
    }
    SUBCASE("random b b^dagger") {
        test::Rng rng(2);
        for (int n = 1; n <= 6; ++n) {
            const CMatrix b = rng.borel(n);
            const CMatrix h = b * b.adjoint();
            const auto f = matcore::uu_dagger_factor(h);
            CHECK(test::residual(f.mat() * f.mat().adjoint(), h) < 1e-12 * h.norm());
            CHECK(test::residual(f.mat(), b) < 1e-10);
        }
    }
    SUBCASE("errors") {
        CMatrix indefinite = CMatrix::Identity(2, 2);
        indefinite(1, 1) = -1.0;
        CHECK_ERROR_CODE(matcore::uu_dagger_factor(indefinite), ErrorCode::not_positive_definite);
        CMatrix skew = CMatrix::Identity(2, 2);
        skew(0, 1) = 0.5;
        CHECK_ERROR_CODE(matcore::uu_dagger_factor(skew), ErrorCode::not_hermitian);
    }
}

TEST_CASE("iwasawa_left") {
    test::Rng rng(3);
    SUBCASE("unitary K") {
        const CMatrix u = rng.unitary(3);
        const auto [b, g] = matcore::iwasawa_left(u);
        CHECK(test::residual(b.mat(), CMatrix::Identity(3, 3)) < 1e-12);
        CHECK(test::residual(g.mat(), u.adjoint()) < 1e-12);
    }
    SUBCASE("Borel K") {
        const CMatrix k = rng.borel(3);
        const auto [b, g] = matcore::iwasawa_left(k);
        CHECK(test::residual(b.mat(), k) < 1e-12);
        CHECK(test::residual(g.mat(), CMatrix::Identity(3, 3)) < 1e-12);
    }
    SUBCASE("random K reconstructs") {
        const CMatrix k = rng.invertible(4);
        const auto [b, g] = matcore::iwasawa_left(k);
        CHECK(test::residual(b.mat() * g.inverse().mat(), k) < 1e-10 * k.norm());
        CHECK(test::residual(b.mat() * b.mat().adjoint(), k * k.adjoint()) < 1e-10 * k.norm() * k.norm());
    }
    SUBCASE("singular K") {
        CMatrix k = CMatrix::Identity(3, 3);
        k(2, 2) = 0.0;
        CHECK_ERROR_CODE(matcore::iwasawa_left(k), ErrorCode::singular);
    }
}

TEST_CASE("iwasawa_right") {
    test::Rng rng(4);
    SUBCASE("unitary K") {
        const CMatrix u = rng.unitary(3);
        const auto [g, b] = matcore::iwasawa_right(u);
        CHECK(test::residual(g.mat(), u) < 1e-12);
        CHECK(test::residual(b.mat(), CMatrix::Identity(3, 3)) < 1e-12);
    }
    SUBCASE("diagonal positive K = b^{-1}") {
        CMatrix k = CMatrix::Zero(2, 2);
        k(0, 0) = 2.0;
        k(1, 1) = 0.25;
        const auto [g, b] = matcore::iwasawa_right(k);
        CHECK(test::residual(g.mat(), CMatrix::Identity(2, 2)) < 1e-14);
        CHECK(test::residual(b.mat(), k.inverse()) < 1e-14);
    }
    SUBCASE("b_R b_R^dagger = (K^dagger K)^{-1}") {
        const CMatrix k = rng.invertible(3);
        const auto [g, b] = matcore::iwasawa_right(k);
        CHECK(test::residual(b.mat() * b.mat().adjoint(), (k.adjoint() * k).inverse()) < 1e-10);
        CHECK(test::residual(g.mat() * b.inverse().mat(), k) < 1e-10 * k.norm());
    }
}

TEST_CASE("iwasawa factors stay unitary for ill-conditioned K") {
    test::Rng rng(5);
    for (int n = 2; n <= 8; ++n) {
        // Condition number around e^{12}.
        RVector s(n);
        for (int j = 0; j < n; ++j) {
            s[j] = std::exp(12.0 * j / (n - 1) - 6.0);
        }
        const CMatrix k = rng.unitary(n) * s.cast<Complex>().asDiagonal() * rng.unitary(n);
        const auto left = matcore::iwasawa_left(k);
        CHECK((left.unitary.mat().adjoint() * left.unitary.mat() - CMatrix::Identity(n, n)).norm() < 1e-13);
        CHECK(matcore::relative_residual(left.borel.mat() * left.unitary.inverse().mat(), k) < 1e-12);
    }
}

TEST_CASE("unitary_eig") {
    SUBCASE("identity is degenerate") {
        const auto eig = matcore::unitary_eig(UnitaryMatrix::identity(3));
        CHECK(eig.degenerate);
        CHECK(eig.angles.cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("diagonal input") {
        const auto u = UnitaryMatrix::diagonal_phases(test::vec({1.8, 0.6}));
        const auto eig = matcore::unitary_eig(u);
        CHECK_FALSE(eig.degenerate);
        CHECK(eig.angles[0] == doctest::Approx(1.8).epsilon(1e-14));
        CHECK(eig.angles[1] == doctest::Approx(0.6).epsilon(1e-14));
        CHECK(eig.vectors.mat().cwiseAbs().isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-12));
    }
    SUBCASE("random unitary reconstructs") {
        test::Rng rng(6);
        const auto u = UnitaryMatrix::from(rng.unitary(5));
        const auto eig = matcore::unitary_eig(u);
        const CMatrix v = eig.vectors.mat();
        const CMatrix rebuilt = v * UnitaryMatrix::diagonal_phases(eig.angles).mat() * v.adjoint();
        CHECK(test::residual(rebuilt, u.mat()) < 1e-9);
        for (int k = 0; k < 5; ++k) {
            CHECK(eig.angles[k] >= 0.0);
            CHECK(eig.angles[k] < 2.0 * test::pi);
            if (k > 0) {
                CHECK(eig.angles[k] < eig.angles[k - 1]);
            }
        }
    }
    SUBCASE("wrap-around gap counts as degenerate") {
        const auto u = UnitaryMatrix::diagonal_phases(test::vec({2.0 * test::pi - 1e-10, 1.0, 1e-10}));
        CHECK(matcore::unitary_eig(u).degenerate);
    }
}

TEST_CASE("herm_exp") {
    test::Rng rng(7);
    const CMatrix g = rng.gaussian(3);
    const CMatrix h = g + g.adjoint();
    CHECK(test::residual(matcore::herm_exp(h, 0.0).mat(), CMatrix::Identity(3, 3)) < 1e-14);

    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = 2.0;
    const CMatrix e = matcore::herm_exp(d, test::pi).mat();
    CHECK(std::abs(e(0, 0) - Complex(-1.0, 0.0)) < 1e-14);
    CHECK(std::abs(e(1, 1) - Complex(1.0, 0.0)) < 1e-14);

    const CMatrix u = matcore::herm_exp(h, 0.37).mat();
    CHECK((u.adjoint() * u - CMatrix::Identity(3, 3)).norm() < 1e-10);
    CHECK_ERROR_CODE(matcore::herm_exp(g, 1.0), ErrorCode::not_hermitian);
}

TEST_CASE("hermitian helpers") {
    CMatrix h = CMatrix::Zero(2, 2);
    h(0, 0) = std::exp(1.0);
    h(1, 1) = std::exp(-2.0);
    const RVector ev = matcore::hermitian_eigenvalues(h);
    CHECK(ev[0] == doctest::Approx(std::exp(-2.0)));
    CHECK(ev[1] == doctest::Approx(std::exp(1.0)));
    const CMatrix log = matcore::hermitian_log(h);
    CHECK(log(0, 0).real() == doctest::Approx(1.0));
    CHECK(log(1, 1).real() == doctest::Approx(-2.0));
    CHECK(matcore::is_hermitian(h));
    CHECK(matcore::relative_residual(h, h) == 0.0);
}
