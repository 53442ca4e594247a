#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "minoverlap/piecewise.hpp"

using namespace minoverlap;
namespace pw = minoverlap::piecewise;

namespace {

constexpr double kPi = std::numbers::pi;

// Composite Simpson on each polynomial piece, evaluated through the piece's
// own coefficients; independent of the closed forms under test.
template <class G>
double simpson(const pw::PiecewiseFn& f, G&& weight) {
    double total = 0.0;
    const auto& kn = f.knots();
    const auto& pc = f.pieces();
    for (size_t i = 0; i + 1 < kn.size(); ++i) {
        const double a = kn[i], b = kn[i + 1];
        auto val = [&](double x) { return (pc[i][0] + pc[i][1] * x) * weight(x); };
        const int n = 64;
        const double h = (b - a) / (2 * n);
        double s = val(a) + val(b);
        for (int j = 1; j < 2 * n; ++j) s += (j % 2 ? 4.0 : 2.0) * val(a + j * h);
        total += s * h / 3.0;
    }
    return total;
}

}  // namespace

TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(pw::PiecewiseFn({0.0}, {}), std::invalid_argument);
    CHECK_THROWS_AS(pw::PiecewiseFn({0.0, 0.0}, {{1.0, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(pw::PiecewiseFn({1.0, 0.0}, {{1.0, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(pw::PiecewiseFn({0.0, 1.0}, {}), std::invalid_argument);
    CHECK_NOTHROW(pw::PiecewiseFn({0.0, 1.0}, {{1.0, 0.0}}));
}

TEST_CASE("evaluation and closed-form moments of a hand-built function") {
    // 2x on [0,1), constant 2 on [1,2).
    pw::PiecewiseFn f({0.0, 1.0, 2.0}, {{0.0, 2.0}, {2.0, 0.0}});
    CHECK(f(-0.5) == 0.0);
    CHECK(f(0.5) == doctest::Approx(1.0));
    CHECK(f(1.5) == doctest::Approx(2.0));
    CHECK(f(2.5) == 0.0);
    CHECK(f.integral() == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(f.mean() == doctest::Approx(2.0 / 3.0 + 3.0).epsilon(1e-15));
    CHECK(f.second_moment() == doctest::Approx(0.5 + 2.0 * 7.0 / 3.0).epsilon(1e-15));
    CHECK(f.sup_norm() == doctest::Approx(2.0));
    CHECK(f.min_value() == doctest::Approx(0.0));
    CHECK_FALSE(f.constant_pieces());
}

TEST_CASE("closed-form integrals agree with quadrature") {
    pw::PiecewiseFn f({-1.0, -0.25, 0.5, 1.0}, {{0.2, 0.1}, {0.9, -0.3}, {0.4, 0.0}});
    CHECK(f.integral() == doctest::Approx(simpson(f, [](double) { return 1.0; })).epsilon(1e-12));
    CHECK(f.mean() == doctest::Approx(simpson(f, [](double x) { return x; })).epsilon(1e-12));
    CHECK(f.second_moment() ==
          doctest::Approx(simpson(f, [](double x) { return x * x; })).epsilon(1e-12));
    for (double omega : {0.5, kPi, 2.0 * kPi, 17.3}) {
        CHECK(f.trig_cos(omega) ==
              doctest::Approx(simpson(f, [&](double x) { return std::cos(omega * x); }))
                  .epsilon(0)
                  .scale(1e-9));
        CHECK(f.trig_sin(omega) ==
              doctest::Approx(simpson(f, [&](double x) { return std::sin(omega * x); }))
                  .epsilon(0)
                  .scale(1e-9));
    }
    CHECK(f.trig_cos(0.0) == doctest::Approx(f.integral()).epsilon(1e-15));
    CHECK(f.trig_sin(0.0) == 0.0);
}

TEST_CASE("step builder and fixture parsing") {
    auto f = pw::PiecewiseFn::step({-1.0, 0.0, 1.0}, {0.25, 0.75});
    CHECK(f.constant_pieces());
    CHECK(f(-0.5) == doctest::Approx(0.25));
    CHECK(f(0.5) == doctest::Approx(0.75));
    CHECK(f.integral() == doctest::Approx(1.0).epsilon(1e-15));

    std::istringstream in(
        "# step density\n"
        "breakpoints -1 0 1\n"
        "values 0.25 0.75\n");
    auto g = pw::parse_step_fixture(in);
    CHECK(g.knots() == f.knots());
    CHECK(g.pieces() == f.pieces());

    std::istringstream bad("values 1 2\n");
    CHECK_THROWS_AS(pw::parse_step_fixture(bad), std::invalid_argument);
}

TEST_CASE("overlap of the uniform density is the tent map scaled to mass one") {
    auto f = pw::PiecewiseFn::step({-1.0, 1.0}, {0.5});
    auto M = pw::overlap_with_complement(f);
    CHECK(M.lo() == doctest::Approx(-2.0));
    CHECK(M.hi() == doctest::Approx(2.0));
    for (double x : {-1.9, -1.0, -0.3, 0.0, 0.7, 1.5})
        CHECK(M(x) == doctest::Approx((2.0 - std::abs(x)) / 4.0).epsilon(1e-14));
    CHECK(M.integral() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(M.mean() == doctest::Approx(0.0).epsilon(0).scale(1e-13));
    CHECK(M.sup_norm() == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("overlap of the one-sided step is the shifted tent") {
    auto f = pw::PiecewiseFn::step({-1.0, 0.0, 1.0}, {1.0, 0.0});
    auto M = pw::overlap_with_complement(f);
    for (double x : {-1.5, -0.5, 0.0})
        CHECK(M(x) == doctest::Approx(0.0).epsilon(0).scale(1e-14));
    for (double x : {0.25, 0.5, 0.99}) CHECK(M(x) == doctest::Approx(x).epsilon(1e-13));
    for (double x : {1.01, 1.5, 1.9}) CHECK(M(x) == doctest::Approx(2.0 - x).epsilon(1e-13));
    CHECK(M.integral() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(M.mean() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(M.second_moment() == doctest::Approx(7.0 / 6.0).epsilon(1e-13));
}

TEST_CASE("overlap mass and mean identities hold for generic step densities") {
    // mass M = 1 and mean M = -2 mean(f) follow from the correlation
    // structure; they pin the construction independent of any hand case.
    auto check = [](const pw::PiecewiseFn& f) {
        auto M = pw::overlap_with_complement(f);
        CHECK(M.integral() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(M.mean() == doctest::Approx(-2.0 * f.mean()).epsilon(0).scale(1e-12));
        CHECK(M.min_value() >= -1e-15);
        CHECK(M.sup_norm() <= 1.0 + 1e-15);
    };
    check(pw::PiecewiseFn::step({-1.0, -0.5, 0.25, 1.0}, {0.8, 0.3, 0.6}));
    check(pw::PiecewiseFn::step({-1.0, -0.9, 0.0, 0.4, 1.0}, {0.0, 0.7, 0.9, 0.25}));
}

TEST_CASE("overlap rejects densities outside the hypothesis") {
    CHECK_THROWS_AS(pw::overlap_with_complement(
                        pw::PiecewiseFn::step({-1.0, 1.0}, {0.75})),  // mass 1.5
                    std::invalid_argument);
    CHECK_THROWS_AS(pw::overlap_with_complement(
                        pw::PiecewiseFn::step({-1.0, 0.0, 1.0}, {1.5, -0.5})),  // range
                    std::invalid_argument);
    CHECK_THROWS_AS(pw::overlap_with_complement(
                        pw::PiecewiseFn::step({0.0, 1.0}, {1.0})),  // domain
                    std::invalid_argument);
}

TEST_CASE("fourier pair matches the trig integrals") {
    auto f = pw::PiecewiseFn::step({-1.0, -0.2, 0.6, 1.0}, {0.9, 0.2, 0.7});
    for (int k = 1; k <= 6; ++k) {
        auto [c, d] = pw::fourier_f(f, k);
        CHECK(c == doctest::Approx(f.trig_cos(kPi * k)).epsilon(1e-14));
        CHECK(d == doctest::Approx(f.trig_sin(kPi * k)).epsilon(1e-14));
    }
}
