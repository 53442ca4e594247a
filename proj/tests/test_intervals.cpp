#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "minoverlap/intervals.hpp"
#include "minoverlap/oracle.hpp"
#include "minoverlap/piecewise.hpp"

using namespace minoverlap;
namespace pw = minoverlap::piecewise;

namespace {

constexpr double kPi = std::numbers::pi;

pw::PiecewiseFn lopsided_step() {
    return pw::PiecewiseFn::step({-1.0, -0.5, 0.25, 1.0}, {0.8, 0.3, 0.6});
}

}  // namespace

TEST_CASE("discretization basics") {
    intervals::Discretization d(8);
    CHECK(d.N == 8);
    CHECK(d.L == doctest::Approx(0.25).epsilon(1e-16));
    CHECK_THROWS_AS(intervals::Discretization(0), std::invalid_argument);
}

TEST_CASE("envelopes bracket the trig functions over each cell") {
    intervals::Discretization d(16);
    auto env = intervals::build_envelopes(d, 3);
    CHECK(env.max_m == 6);
    for (int m = 1; m <= env.max_m; ++m)
        for (int j = 1; j <= d.N; ++j)
            for (int s = 0; s <= 20; ++s) {
                const double x = (j - 1) * d.L + s * d.L / 20.0;
                const double c = std::cos(kPi * m * x / 2.0);
                const double sv = std::sin(kPi * m * x / 2.0);
                CHECK(env.alo(m, j) <= c + 1e-15);
                CHECK(c <= env.ahi(m, j) + 1e-15);
                CHECK(env.blo(m, j) <= sv + 1e-15);
                CHECK(sv <= env.bhi(m, j) + 1e-15);
            }
}

TEST_CASE("envelope width is pi m L / 2") {
    intervals::Discretization d(10);
    auto env = intervals::build_envelopes(d, 2);
    for (int m = 1; m <= 4; ++m)
        for (int j = 1; j <= 10; ++j) {
            CHECK(env.ahi(m, j) - env.alo(m, j) ==
                  doctest::Approx(kPi * m * d.L / 2.0).epsilon(1e-12));
            CHECK(env.bhi(m, j) - env.blo(m, j) ==
                  doctest::Approx(kPi * m * d.L / 2.0).epsilon(1e-12));
        }
}

TEST_CASE("R = 0 still provides the m = 2 row") {
    auto env = intervals::build_envelopes(intervals::Discretization(4), 0);
    CHECK(env.max_m == 2);
}

TEST_CASE("brackets contain the exact integrals of the overlap") {
    const auto f = lopsided_step();
    const auto M = pw::overlap_with_complement(f);
    const int N = 40;
    const auto avg = oracle::averages(M, N);
    const auto env = intervals::build_envelopes(intervals::Discretization(N), 4);

    for (int m = 1; m <= 8; ++m) {
        const double Am = 0.5 * M.trig_cos(kPi * m / 2.0);
        const double Bm = 0.5 * M.trig_sin(kPi * m / 2.0);
        auto [alo, ahi] = intervals::cos_bracket(avg, env, m);
        auto [blo, bhi] = intervals::sin_bracket(avg, env, m);
        CHECK(alo <= Am);
        CHECK(Am <= ahi);
        CHECK(blo <= Bm);
        CHECK(Bm <= bhi);
        // Width never exceeds the per-cell deviation times the mass.
        CHECK(ahi - alo <= kPi * m * env.L / 2.0 + 1e-12);
    }

    auto [mlo, mhi] = intervals::mean_bracket(avg, env.L);
    CHECK(mlo <= M.mean());
    CHECK(M.mean() <= mhi);

    auto [qlo, qhi] = intervals::moment_bracket(avg, env.L);
    CHECK(qlo <= M.second_moment());
    CHECK(M.second_moment() <= qhi);
    CHECK(qhi - qlo <= 3.0 * env.L * (2.0 + env.L) + 1e-12);
}

TEST_CASE("brackets sharpen with resolution") {
    const auto M = pw::overlap_with_complement(lopsided_step());
    double prev_width = 1e9;
    for (int N : {10, 40, 160}) {
        const auto avg = oracle::averages(M, N);
        const auto env = intervals::build_envelopes(intervals::Discretization(N), 2);
        auto [lo, hi] = intervals::cos_bracket(avg, env, 2);
        CHECK(hi - lo < prev_width);
        prev_width = hi - lo;
    }
    CHECK(prev_width < 1e-2);
}

TEST_CASE("argument validation") {
    intervals::Averages avg;
    avg.w.assign(4, 0.25);
    avg.v.assign(3, 0.25);
    auto env = intervals::build_envelopes(intervals::Discretization(4), 1);
    CHECK_THROWS_AS(intervals::cos_bracket(avg, env, 1), std::invalid_argument);
    CHECK_THROWS_AS(intervals::mean_bracket(avg, 0.5), std::invalid_argument);
    avg.v.push_back(0.25);
    CHECK_THROWS_AS(intervals::cos_bracket(avg, env, 3), std::invalid_argument);
    CHECK_NOTHROW(intervals::cos_bracket(avg, env, 2));
}
