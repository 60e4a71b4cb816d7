#pragma once

#include "plrs/errors.hpp"
#include "plrs/matcore.hpp"
#include "plrs/reduction.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace test {

using plrs::CMatrix;
using plrs::Complex;
using plrs::CVector;
using plrs::RVector;

inline constexpr double pi = std::numbers::pi;
inline const double two_ln2 = 2.0 * std::log(2.0);

// Seeded draws for test inputs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

    CMatrix gaussian(int n) {
        std::normal_distribution<double> g;
        CMatrix m(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                m(i, j) = Complex(g(engine_), g(engine_));
            }
        }
        return m;
    }

    CMatrix invertible(int n) { return CMatrix::Identity(n, n) + 0.5 * gaussian(n) / std::sqrt(double(n)); }

    CMatrix unitary(int n) {
        Eigen::HouseholderQR<CMatrix> qr(gaussian(n));
        return qr.householderQ() * CMatrix::Identity(n, n);
    }

    CMatrix borel(int n) {
        CMatrix b = gaussian(n).triangularView<Eigen::StrictlyUpper>();
        for (int j = 0; j < n; ++j) {
            b(j, j) = uniform(0.5, 2.0);
        }
        return b;
    }

    // Angles with cyclic gaps of at least `spread * pi / n`.
    RVector alcove(int n, double spread = 0.5) {
        for (;;) {
            RVector q(n);
            for (int k = 0; k < n; ++k) {
                q[k] = uniform(0.0, pi);
            }
            std::sort(q.data(), q.data() + n, std::greater<>());
            bool ok = pi - (q[0] - q[n - 1]) > spread * pi / n;
            for (int k = 0; k + 1 < n; ++k) {
                ok = ok && q[k] - q[k + 1] > spread * pi / n;
            }
            if (ok) {
                return q;
            }
        }
    }

    plrs::PhasePoint phase_point(int n, double p_max = 0.5) {
        RVector p(n);
        for (int k = 0; k < n; ++k) {
            p[k] = uniform(-p_max, p_max);
        }
        return plrs::PhasePoint::from(alcove(n), p);
    }

private:
    std::mt19937_64 engine_;
};

inline double residual(const CMatrix& a, const CMatrix& b) {
    return (a - b).norm();
}

inline RVector vec(std::initializer_list<double> values) {
    RVector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) {
        v[i++] = x;
    }
    return v;
}

} // namespace test

// Checks that `expr` throws plrs::Error carrying `expected`.
#define CHECK_ERROR_CODE(expr, expected)                                                                              \
    do {                                                                                                              \
        bool caught_ = false;                                                                                         \
        try {                                                                                                         \
            (void)(expr);                                                                                             \
        } catch (const plrs::Error& e) {                                                                              \
            caught_ = true;                                                                                           \
            CHECK(e.code() == (expected));                                                                            \
        }                                                                                                             \
        CHECK_MESSAGE(caught_, "expected plrs::Error from " #expr);                                                   \
    } while (false)
