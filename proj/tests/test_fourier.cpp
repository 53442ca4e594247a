#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "minoverlap/fourier.hpp"
#include "minoverlap/piecewise.hpp"

using namespace minoverlap;
namespace pw = minoverlap::piecewise;

namespace {

constexpr double kPi = std::numbers::pi;

pw::PiecewiseFn constant_density() { return pw::PiecewiseFn::step({-1.0, 1.0}, {0.5}); }

pw::PiecewiseFn shifted_step() { return pw::PiecewiseFn::step({-1.0, 0.0, 1.0}, {1.0, 0.0}); }

// 64-cell staircase holding the exact cell averages of 1/2 + 0.3 cos(pi x).
pw::PiecewiseFn staircase() {
    const int n = 64;
    std::vector<double> knots(n + 1), vals(n);
    for (int i = 0; i <= n; ++i) knots[i] = -1.0 + 2.0 * i / n;
    for (int i = 0; i < n; ++i) {
        const double a = knots[i], b = knots[i + 1];
        vals[i] = 0.5 + 0.3 * (std::sin(kPi * b) - std::sin(kPi * a)) / (kPi * (b - a));
    }
    return pw::PiecewiseFn::step(std::move(knots), std::move(vals));
}

// Exact remainder of the truncated a/b formulas: extend the coefficient sum
// far past T and take the difference against the direct half-frequency
// integral.
fourier::Truncation truncation_of(const pw::PiecewiseFn& f, int T) {
    fourier::Truncation ft;
    ft.T = T;
    for (int k = 1; k <= T; ++k) {
        auto [c, d] = pw::fourier_f(f, k);
        ft.c.push_back(c);
        ft.d.push_back(d);
    }
    return ft;
}

double exact_eps(const pw::PiecewiseFn& f, int m, const fourier::Truncation& ft) {
    const double am = 0.5 * f.trig_cos(kPi * m / 2.0);
    return am - fourier::a_coeff(m, ft, 0.0);
}

double exact_del(const pw::PiecewiseFn& f, int m, const fourier::Truncation& ft) {
    const double bm = 0.5 * f.trig_sin(kPi * m / 2.0);
    return bm - fourier::b_coeff(m, ft, 0.0);
}

}  // namespace

TEST_CASE("sine factor cycles 1, 0, -1, 0") {
    CHECK(fourier::sine_factor(1) == 1);
    CHECK(fourier::sine_factor(2) == 0);
    CHECK(fourier::sine_factor(3) == -1);
    CHECK(fourier::sine_factor(4) == 0);
    CHECK(fourier::sine_factor(5) == 1);
    for (int m = 1; m <= 40; ++m)
        CHECK(fourier::sine_factor(m) == int(std::llround(std::sin(kPi * m / 2.0))));
}

TEST_CASE("constant density has vanishing full-period coefficients") {
    const auto f = constant_density();
    for (int k = 1; k <= 8; ++k) {
        auto [c, d] = pw::fourier_f(f, k);
        CHECK(c == doctest::Approx(0.0).epsilon(0).scale(1e-14));
        CHECK(d == doctest::Approx(0.0).epsilon(0).scale(1e-14));
    }
    // Odd half-frequency coefficients survive: a_m = sin(m pi/2)/(m pi).
    const auto ft = truncation_of(f, 10);
    for (int m = 1; m <= 9; m += 2) {
        const double want = fourier::sine_factor(m) / (m * kPi);
        CHECK(fourier::a_coeff(m, ft, 0.0) == doctest::Approx(want).epsilon(1e-13));
        CHECK(0.5 * f.trig_cos(kPi * m / 2.0) == doctest::Approx(want).epsilon(1e-13));
        CHECK(fourier::b_coeff(m, ft, 0.0) == doctest::Approx(0.0).epsilon(0).scale(1e-14));
    }
}

TEST_CASE("a and b formulas reproduce the direct integrals once the remainder is added") {
    const int T = 48;
    for (const auto& f : {constant_density(), shifted_step(), staircase()}) {
        const auto ft = truncation_of(f, T);
        for (int m = 1; m <= 20; ++m) {
            const double am = 0.5 * f.trig_cos(kPi * m / 2.0);
            const double bm = 0.5 * f.trig_sin(kPi * m / 2.0);
            if (m % 2 == 0) {
                // Even m closes without a remainder.
                CHECK(fourier::a_coeff(m, ft, 0.0) == doctest::Approx(am).epsilon(1e-12));
                CHECK(fourier::b_coeff(m, ft, 0.0) == doctest::Approx(bm).epsilon(1e-12));
            } else {
                const double eps = exact_eps(f, m, ft);
                const double del = exact_del(f, m, ft);
                CHECK(fourier::a_coeff(m, ft, eps) == doctest::Approx(am).epsilon(1e-13));
                CHECK(fourier::b_coeff(m, ft, del) == doctest::Approx(bm).epsilon(1e-13));
                // The remainders are genuine tails: they shrink under the bound.
                CHECK(std::abs(eps) <= fourier::tail_bound_cos(m, T));
                CHECK(std::abs(del) <= fourier::tail_bound_sin(m, T));
            }
        }
    }
}

TEST_CASE("overlap coefficients match the closed-form integrals of M") {
    for (const auto& f : {constant_density(), shifted_step(), staircase()}) {
        const auto M = pw::overlap_with_complement(f);
        for (int m = 1; m <= 20; ++m) {
            const double am = 0.5 * f.trig_cos(kPi * m / 2.0);
            const double bm = 0.5 * f.trig_sin(kPi * m / 2.0);
            const double Am = 0.5 * M.trig_cos(kPi * m / 2.0);
            const double Bm = 0.5 * M.trig_sin(kPi * m / 2.0);
            CHECK(fourier::A_coeff(m, am, bm) == doctest::Approx(Am).epsilon(0).scale(1e-10));
            CHECK(fourier::B_coeff(m, bm) == doctest::Approx(Bm).epsilon(0).scale(1e-10));
        }
    }
}

TEST_CASE("even-frequency overlap coefficients have fixed sign") {
    // sin(m pi/2) = 0 kills the linear term: B vanishes and A is a negative
    // square, for any coefficient values whatsoever.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int it = 0; it < 200; ++it) {
        const int m = 2 * (1 + int(rng() % 10));
        const double a = u(rng), b = u(rng);
        CHECK(fourier::B_coeff(m, b) == 0.0);
        CHECK(fourier::A_coeff(m, a, b) <= 0.0);
    }
}

TEST_CASE("tail bounds evaluate their closed forms") {
    // Spelled-out arithmetic, independent of the implementation's grouping.
    const double lead = 1.0 / (4.0 - 9.0 / (50.0 * 50.0));
    CHECK(fourier::tail_bound_cos(3, 50) ==
          doctest::Approx(lead * 6.0 / (kPi * std::sqrt(6.0 * 50.0 * 50.0 * 50.0)))
              .epsilon(1e-15));
    CHECK(fourier::tail_bound_sin(3, 50) ==
          doctest::Approx(lead * 4.0 / (kPi * std::sqrt(100.0))).epsilon(1e-15));
    // Outward rounding: never below the long-double evaluation.
    for (int T : {2, 10, 100, 1000})
        for (int m = 1; m < 2 * T && m <= 25; m += 2) {
            const long double md = m, Td = T;
            const long double c = (1.0L / (4.0L - md * md / (Td * Td))) * 2.0L * md /
                                  (kPi * std::sqrt(6.0L * Td * Td * Td));
            const long double s = (1.0L / (4.0L - md * md / (Td * Td))) * 4.0L /
                                  (kPi * std::sqrt(2.0L * Td));
            CHECK(double(c) <= fourier::tail_bound_cos(m, T));
            CHECK(double(s) <= fourier::tail_bound_sin(m, T));
        }
}

TEST_CASE("tail bounds dominate brute-force tails") {
    // Random coefficient tails under the Parseval budget 1/2; remainders are
    // summed directly over k = T+1.. with the same alternating kernel.
    std::mt19937_64 rng(20260825);
    std::normal_distribution<double> g(0.0, 1.0);
    const int T = 12, K = 4000;
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<double> c(K), d(K);
        double norm2 = 0.0;
        for (int k = 0; k < K; ++k) {
            c[k] = g(rng) / (k + 1);
            d[k] = g(rng) / (k + 1);
            norm2 += c[k] * c[k] + d[k] * d[k];
        }
        const double scale = std::sqrt(0.5 / norm2);
        for (int k = 0; k < K; ++k) {
            c[k] *= scale;
            d[k] *= scale;
        }
        for (int m = 1; m < 2 * T; m += 2) {
            double eps = 0.0, del = 0.0, sign = (T % 2 == 0) ? -1.0 : 1.0;
            for (int k = T + 1; k <= K; ++k) {
                eps += sign * c[k - 1] / (double(m) * m - 4.0 * double(k) * k);
                del += sign * double(k) * d[k - 1] / (double(m) * m - 4.0 * double(k) * k);
                sign = -sign;
            }
            eps *= 2.0 * m * fourier::sine_factor(m) / kPi;
            del *= 4.0 * fourier::sine_factor(m) / kPi;
            CHECK(std::abs(eps) <= fourier::tail_bound_cos(m, T));
            CHECK(std::abs(del) <= fourier::tail_bound_sin(m, T));
        }
    }
}

TEST_CASE("tail bound argument checking") {
    CHECK_THROWS_AS(fourier::tail_bound_cos(2, 10), std::invalid_argument);
    CHECK_THROWS_AS(fourier::tail_bound_cos(21, 10), std::invalid_argument);
    CHECK_THROWS_AS(fourier::tail_bound_sin(-1, 10), std::invalid_argument);
    CHECK_THROWS_AS(fourier::tail_bound_sin(1, 0), std::invalid_argument);
    CHECK_NOTHROW(fourier::tail_bound_cos(19, 10));
}

TEST_CASE("second moment right-hand side") {
    CHECK(fourier::second_moment_rhs(0.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-16));
    CHECK(fourier::second_moment_rhs(1.0) == doctest::Approx(2.0 / 3.0 + 0.5).epsilon(1e-16));
    CHECK(fourier::second_moment_rhs(-2.0) == doctest::Approx(2.0 / 3.0 + 2.0).epsilon(1e-16));
}
