#include "doctest.h"
#include "support.hpp"

#include "plrs/heisenberg.hpp"
#include "plrs/reduction.hpp"

using namespace plrs;
using test::CMatrix;

namespace {

CMatrix diag2(double a, double b) {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

const MuWeights rs_weights{{1, 1.0}, {-1, -1.0}};

} // namespace

TEST_CASE("MuWeights") {
    MuWeights mu;
    CHECK(mu.empty());
    mu.set(2, 1.5);
    mu.set(-1, 0.0);
    CHECK(mu.terms().size() == 1);
    CHECK_ERROR_CODE(mu.set(0, 1.0), ErrorCode::invalid_argument);
    CHECK_ERROR_CODE(mu.set(1, std::nan("")), ErrorCode::invalid_argument);
    // 1/2 (1.5 / 2) lambda^2 at lambda = 2
    CHECK(mu.hamiltonian_density(2.0) == doctest::Approx(1.5));
    CHECK(mu.flow_generator(2.0) == doctest::Approx(1.5 / 4.0));
}

TEST_CASE("DoublePoint rejects singular matrices") {
    CHECK_ERROR_CODE(DoublePoint::from(CMatrix::Zero(2, 2)), ErrorCode::singular);
}

TEST_CASE("iwasawa_maps") {
    test::Rng rng(10);
    SUBCASE("unitary K") {
        const CMatrix u = rng.unitary(3);
        const auto maps = heisenberg::iwasawa_maps(DoublePoint::from(u));
        CHECK(test::residual(maps.lambda_left.mat(), CMatrix::Identity(3, 3)) < 1e-12);
        CHECK(test::residual(maps.lambda_right.mat(), CMatrix::Identity(3, 3)) < 1e-12);
        CHECK(test::residual(maps.xi_left.mat(), u) < 1e-12);
        CHECK(test::residual(maps.xi_right.mat(), u.adjoint()) < 1e-12);
    }
    SUBCASE("Borel K reconstructs both ways") {
        const CMatrix b = rng.borel(3);
        const auto maps = heisenberg::iwasawa_maps(DoublePoint::from(b));
        CHECK(test::residual(maps.xi_left.mat() * maps.lambda_right.inverse().mat(), b) < 1e-10 * b.norm());
        CHECK(test::residual(maps.lambda_left.mat(), b) < 1e-10);
    }
    SUBCASE("random K") {
        const CMatrix k = rng.invertible(4);
        const auto maps = heisenberg::iwasawa_maps(DoublePoint::from(k));
        CHECK(test::residual(maps.lambda_left.mat() * maps.xi_right.inverse().mat(), k) < 1e-10 * k.norm());
        CHECK(test::residual(maps.xi_left.mat() * maps.lambda_right.inverse().mat(), k) < 1e-10 * k.norm());
    }
}

TEST_CASE("lax_free") {
    CHECK(test::residual(heisenberg::lax_free(DoublePoint::from(CMatrix::Identity(3, 3))), CMatrix::Identity(3, 3)) <
          1e-15);
    CHECK(test::residual(heisenberg::lax_free(DoublePoint::from(diag2(2.0, 0.5))), diag2(0.25, 4.0)) < 1e-14);

    test::Rng rng(11);
    const auto k = DoublePoint::from(rng.invertible(4));
    const CMatrix l = heisenberg::lax_free(k);
    const auto maps = heisenberg::iwasawa_maps(k);
    CHECK(test::residual(l, maps.lambda_right.mat() * maps.lambda_right.mat().adjoint()) < 1e-10);
    CHECK(matcore::is_hermitian(l));
}

TEST_CASE("hamiltonian_free") {
    CHECK(heisenberg::hamiltonian_free(DoublePoint::from(CMatrix::Identity(3, 3)), rs_weights) ==
          doctest::Approx(3.0));
    CHECK(heisenberg::hamiltonian_free(DoublePoint::from(diag2(2.0, 0.5)), MuWeights{}) == 0.0);
    CHECK(heisenberg::hamiltonian_free(DoublePoint::from(diag2(2.0, 0.5)), rs_weights) == doctest::Approx(17.0 / 4.0));

    // Trace route against the eigenvalue sum.
    test::Rng rng(12);
    const auto k = DoublePoint::from(rng.invertible(4));
    const RVector ev = matcore::hermitian_eigenvalues(heisenberg::lax_free(k));
    const MuWeights mu{{1, 1.0}, {3, -2.0}, {-2, 0.5}};
    double expected = 0.0;
    for (double lambda : ev) {
        expected += 0.5 * (lambda - 2.0 / 3.0 * lambda * lambda * lambda + 0.5 / -2.0 / (lambda * lambda));
    }
    CHECK(heisenberg::hamiltonian_free(k, mu) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("spectral_hamiltonian rejects bad Lax matrices") {
    CMatrix bad = CMatrix::Identity(2, 2);
    bad(1, 1) = -1.0;
    CHECK_ERROR_CODE(heisenberg::spectral_hamiltonian(bad, rs_weights), ErrorCode::not_positive_definite);
}

TEST_CASE("quasi_adjoint") {
    test::Rng rng(13);
    const auto k = DoublePoint::from(rng.invertible(3));
    SUBCASE("identity acts trivially") {
        CHECK(test::residual(heisenberg::quasi_adjoint(UnitaryMatrix::identity(3), k).mat(), k.mat()) < 1e-12);
    }
    SUBCASE("central phase matches the definition") {
        const Complex phase = std::polar(1.0, 0.7);
        const auto g = UnitaryMatrix::from(phase * CMatrix::Identity(3, 3));
        const auto lambda_left = matcore::iwasawa_left(k.mat()).borel.mat();
        const CMatrix xi_r = matcore::iwasawa_left(g.mat() * lambda_left).unitary.mat();
        const CMatrix expected = phase * k.mat() * xi_r;
        CHECK(test::residual(heisenberg::quasi_adjoint(g, k).mat(), expected) < 1e-12);
    }
    SUBCASE("Hamiltonians are invariant") {
        const auto g = UnitaryMatrix::from(rng.unitary(3));
        const auto moved = heisenberg::quasi_adjoint(g, k);
        for (const auto& mu : {rs_weights, MuWeights{{2, 1.0}}, MuWeights{{1, 1.0}, {3, -2.0}}}) {
            CHECK(heisenberg::hamiltonian_free(moved, mu) ==
                  doctest::Approx(heisenberg::hamiltonian_free(k, mu)).epsilon(1e-10));
        }
    }
    SUBCASE("action property") {
        const auto g = UnitaryMatrix::from(rng.unitary(3));
        const auto h = UnitaryMatrix::from(rng.unitary(3));
        const auto lhs = heisenberg::quasi_adjoint(g * h, k);
        const auto rhs = heisenberg::quasi_adjoint(g, heisenberg::quasi_adjoint(h, k));
        CHECK(test::residual(lhs.mat(), rhs.mat()) < 1e-9);
    }
}

TEST_CASE("moment_map") {
    test::Rng rng(14);
    SUBCASE("unitary K") {
        const auto lambda = heisenberg::moment_map(DoublePoint::from(rng.unitary(3)));
        CHECK(test::residual(lambda.mat(), CMatrix::Identity(3, 3)) < 1e-12);
    }
    SUBCASE("diagonal positive K lands in B") {
        const auto lambda = heisenberg::moment_map(DoublePoint::from(diag2(2.0, 0.5)));
        CHECK(std::abs(lambda.mat()(1, 0)) == 0.0);
        CHECK(lambda.mat()(0, 0).real() > 0.0);
    }
    SUBCASE("slice point maps to nu") {
        const Coupling x(0.9);
        const auto pt = rng.phase_point(4);
        const auto lambda = heisenberg::moment_map(reduction::slice_point(pt, x));
        CHECK(test::residual(lambda.mat(), reduction::nu(x, 4).mat()) < 1e-9);
    }
    SUBCASE("equivariance") {
        const auto k = DoublePoint::from(rng.invertible(5));
        const auto g = UnitaryMatrix::from(rng.unitary(5));
        const CMatrix a = heisenberg::moment_map(k).mat();
        const CMatrix b = heisenberg::moment_map(heisenberg::quasi_adjoint(g, k)).mat();
        CHECK(matcore::relative_residual(b * b.adjoint(), g.mat() * a * a.adjoint() * g.mat().adjoint()) < 1e-9);
    }
}

TEST_CASE("free_flow") {
    test::Rng rng(15);
    const auto k0 = DoublePoint::from(rng.invertible(3));
    CHECK(test::residual(heisenberg::free_flow(k0, rs_weights, 0.0).mat(), k0.mat()) < 1e-10);
    CHECK(test::residual(heisenberg::free_flow(k0, MuWeights{}, 3.0).mat(), k0.mat()) == 0.0);

    const auto kt = heisenberg::free_flow(k0, rs_weights, 0.7);
    const CMatrix b0 = matcore::iwasawa_left(k0.mat()).borel.mat();
    const CMatrix bt = matcore::iwasawa_left(kt.mat()).borel.mat();
    CHECK(test::residual(bt, b0) < 1e-9);

    const RVector s0 = matcore::hermitian_eigenvalues(heisenberg::lax_free(k0));
    const RVector st = matcore::hermitian_eigenvalues(heisenberg::lax_free(kt));
    CHECK((s0 - st).cwiseAbs().maxCoeff() < 1e-9);

    const CMatrix m0 = heisenberg::moment_map(k0).mat();
    CHECK(test::residual(heisenberg::moment_map(kt).mat(), m0) < 1e-9);

    SUBCASE("composition and commutation") {
        const MuWeights other{{2, 1.0}};
        const auto two = heisenberg::free_flow(heisenberg::free_flow(k0, rs_weights, 0.3), rs_weights, 0.4);
        CHECK(matcore::relative_residual(two.mat(), kt.mat()) < 1e-9);
        const auto st_flow = heisenberg::free_flow(heisenberg::free_flow(k0, rs_weights, 0.3), other, -0.5);
        const auto ts_flow = heisenberg::free_flow(heisenberg::free_flow(k0, other, -0.5), rs_weights, 0.3);
        CHECK(matcore::relative_residual(st_flow.mat(), ts_flow.mat()) < 1e-8);
    }
}
