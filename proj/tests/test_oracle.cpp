#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "minoverlap/oracle.hpp"
#include "minoverlap/program.hpp"

using namespace minoverlap;
namespace pw = minoverlap::piecewise;

namespace {

constexpr double kPi = std::numbers::pi;

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

programs::ProgramInput wide_input(int N, int T, int R) {
    programs::ProgramInput in;
    in.kind = programs::ProgramKind::full;
    in.N = N;
    in.T = T;
    in.R = R;
    in.h1 = 0.0;
    in.h2 = 2.0;
    in.p1 = 0.0;
    in.p2 = 2.0 / kPi;
    in.q1 = -2.0 / kPi;
    in.q2 = 2.0 / kPi;
    return in;
}

}  // namespace

TEST_CASE("cell averages integrate the overlap exactly") {
    const auto f = pw::PiecewiseFn::step({-1.0, 0.0, 1.0}, {1.0, 0.0});
    const auto M = pw::overlap_with_complement(f);
    const int N = 8;
    const auto avg = oracle::averages(M, N);
    const double L = 2.0 / N;
    // M = x on [0,1], 2-x on [1,2], 0 on the left: averages are midpoints.
    for (int j = 1; j <= N; ++j) {
        const double mid = (j - 0.5) * L;
        const double want = mid <= 1.0 ? mid : 2.0 - mid;
        CHECK(avg.w[j - 1] == doctest::Approx(want).epsilon(1e-13));
        CHECK(std::abs(avg.v[j - 1]) <= 1e-14);
    }
    // Total mass: L * (sum w + sum v) = 1.
    double mass = 0.0;
    for (int j = 0; j < N; ++j) mass += avg.w[j] + avg.v[j];
    CHECK(L * mass == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("assignment data matches the density's closed forms") {
    const auto f = staircase();
    const auto in = wide_input(32, 12, 4);
    const auto a = oracle::assignment(f, in);
    const auto M = pw::overlap_with_complement(f);
    CHECK(a.omega == doctest::Approx(M.sup_norm()).epsilon(1e-14));
    CHECK(std::abs(a.mean - M.mean()) <= 1e-13);
    CHECK(a.second_moment == doctest::Approx(M.second_moment()).epsilon(1e-13));
    for (int k = 1; k <= in.T; ++k) {
        auto [c, d] = pw::fourier_f(f, k);
        CHECK(std::abs(a.ft.c[k - 1] - c) <= 1e-14);
        CHECK(std::abs(a.ft.d[k - 1] - d) <= 1e-14);
    }
    // Remainders reproduce the direct half-frequency integrals.
    for (int i = 1; i <= in.R; ++i) {
        const int m = 2 * i - 1;
        const double am = 0.5 * f.trig_cos(kPi * m / 2.0);
        const double bm = 0.5 * f.trig_sin(kPi * m / 2.0);
        CHECK(fourier::a_coeff(m, a.ft, a.eps[i - 1]) == doctest::Approx(am).epsilon(1e-9));
        CHECK(std::abs(fourier::b_coeff(m, a.ft, a.del[i - 1]) - bm) <= 1e-9);
        CHECK(std::abs(a.eps[i - 1]) <= fourier::tail_bound_cos(m, in.T));
        CHECK(std::abs(a.del[i - 1]) <= fourier::tail_bound_sin(m, in.T));
    }
}

TEST_CASE("assignments are feasible for the programs they describe") {
    const auto fs = {pw::PiecewiseFn::step({-1.0, 1.0}, {0.5}),
                     pw::PiecewiseFn::step({-1.0, 0.0, 1.0}, {1.0, 0.0}), staircase()};
    for (const auto& f : fs) {
        const auto in = wide_input(48, 16, 5);
        const auto prog = programs::build_full(in);
        const auto a = oracle::assignment(f, in);
        const auto x = oracle::to_primal(a, prog.layout);
        std::string worst;
        const double r = programs::min_residual(prog, x, &worst);
        INFO("worst row ", worst);
        CHECK(r >= -1e-9);
    }
}

TEST_CASE("omega never beats the sup norm and the LP accepts the folded averages") {
    const auto f = staircase();  // even density, so M is even and w = v
    const auto M = pw::overlap_with_complement(f);
    const auto avg = oracle::averages(M, 32);
    double omega = 0.0;
    for (double w : avg.w) omega = std::max(omega, w);
    for (double v : avg.v) omega = std::max(omega, v);
    CHECK(omega <= M.sup_norm() + 1e-15);

    // LP cells are the folded averages (w + v)/2 of an even overlap.
    const auto lp = programs::build_lp(32, 4);
    std::vector<double> x(lp.layout.count(), 0.0);
    x[0] = M.sup_norm();
    for (int j = 1; j <= 32; ++j) {
        CHECK(std::abs(avg.w[j - 1] - avg.v[j - 1]) <= 1e-13);
        x[j] = (avg.w[j - 1] + avg.v[j - 1]) / 2.0;
    }
    std::string worst;
    const double r = programs::min_residual(lp, x, &worst);
    INFO("worst row ", worst);
    CHECK(r >= -1e-9);
}

TEST_CASE("window violations are reported as domain errors") {
    const auto f = staircase();  // mean(M) = 0, c_1 > 0
    auto in = wide_input(16, 8, 2);
    in.h1 = 0.5;  // exclude mean 0
    CHECK_THROWS_AS(oracle::assignment(f, in), std::domain_error);
    in = wide_input(16, 8, 2);
    in.p2 = 0.1;  // exclude c_1 = 0.2995
    CHECK_THROWS_AS(oracle::assignment(f, in), std::domain_error);
    in = wide_input(16, 8, 2);
    in.q2 = -0.5;  // exclude d_1 = 0
    CHECK_THROWS_AS(oracle::assignment(f, in), std::domain_error);
}

TEST_CASE("argument validation") {
    const auto f = staircase();
    auto in = wide_input(16, 8, 2);
    CHECK_THROWS_AS(oracle::assignment(f, in, 8 * 8), std::invalid_argument);  // k_ext < 10T
    in.kind = programs::ProgramKind::lp;
    CHECK_THROWS_AS(oracle::assignment(f, in), std::invalid_argument);
    CHECK_THROWS_AS(oracle::averages(pw::overlap_with_complement(f), 0), std::invalid_argument);
}

TEST_CASE("to_primal places every block at its layout slot") {
    const auto f = staircase();
    const auto in = wide_input(8, 3, 2);
    const auto prog = programs::build_full(in);
    const auto a = oracle::assignment(f, in);
    const auto x = oracle::to_primal(a, prog.layout);
    REQUIRE(int(x.size()) == prog.num_vars());
    CHECK(x[prog.layout.omega()] == a.omega);
    CHECK(x[prog.layout.w(3)] == a.avg.w[2]);
    CHECK(x[prog.layout.v(8)] == a.avg.v[7]);
    CHECK(x[prog.layout.c(2)] == a.ft.c[1]);
    CHECK(x[prog.layout.d(3)] == a.ft.d[2]);
    CHECK(x[prog.layout.eps(1)] == a.eps[0]);
    CHECK(x[prog.layout.del(2)] == a.del[1]);
}
