#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "minoverlap/dual.hpp"
#include "minoverlap/program.hpp"

using namespace minoverlap;
namespace pg = minoverlap::programs;

namespace {

constexpr double kPi = std::numbers::pi;

pg::ProgramInput full_input(int N, int T, int R) {
    pg::ProgramInput in;
    in.kind = pg::ProgramKind::full;
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

TEST_CASE("elimination selects the designated pivots and nearby partners") {
    auto d = dual::dualize(pg::build_lp(3, 1));
    dual::eliminate(d);
    REQUIRE(d.eliminated);
    const auto& prog = d.p();

    // Pivot of Omega is the ceiling row, pivot of w_j its sign row.
    CHECK(prog.cons[d.pivot_of_var[0]].family == pg::Family::obnd);
    for (int j = 1; j <= 3; ++j) {
        CHECK(prog.cons[d.pivot_of_var[j]].family == pg::Family::wbnd_2);
        CHECK(prog.cons[d.pivot_of_var[j]].i0 == j);
    }

    // Partners repair in the opposite direction with minimal support.
    CHECK(prog.cons[d.partner_of_var[0]].family == pg::Family::wbnd_1);
    for (int j = 1; j <= 3; ++j) {
        CHECK(prog.cons[d.partner_of_var[j]].family == pg::Family::wbnd_1);
        CHECK(prog.cons[d.partner_of_var[j]].i0 == j);
    }

    // Columns list the non-pivot rows touching each variable in constraint
    // order, the bound row before any norm rows of the same constraint.
    for (int v = 0; v < prog.num_vars(); ++v) {
        int prev_con = -1, prev_row = -2;
        for (const auto& t : d.columns[v]) {
            if (t.con == prev_con)
                CHECK(t.row > prev_row);
            else
                CHECK(t.con > prev_con);
            prev_con = t.con;
            prev_row = t.row;
            CHECK(t.con != d.pivot_of_var[v]);
            CHECK(t.coef != 0.0);
        }
    }
}

TEST_CASE("full program pivots cover every block") {
    auto d = dual::dualize(pg::build_full(full_input(4, 3, 1)));
    dual::eliminate(d);
    const auto& prog = d.p();
    const auto& lay = prog.layout;
    CHECK(prog.cons[d.pivot_of_var[lay.omega()]].family == pg::Family::obnd);
    CHECK(prog.cons[d.pivot_of_var[lay.w(2)]].family == pg::Family::wbnd_2);
    CHECK(prog.cons[d.pivot_of_var[lay.v(4)]].family == pg::Family::vbnd_2);
    CHECK(prog.cons[d.pivot_of_var[lay.c(2)]].family == pg::Family::ckbnd_2);
    CHECK(prog.cons[d.pivot_of_var[lay.d(3)]].family == pg::Family::dkbnd_2);
    CHECK(prog.cons[d.pivot_of_var[lay.eps(1)]].family == pg::Family::ep_2);
    CHECK(prog.cons[d.pivot_of_var[lay.del(1)]].family == pg::Family::del_2);

    // The tail variable eps_1 appears in the first cosine cone's a-row and
    // its own floor row, nothing else (constraint order).
    const auto& col = d.columns[lay.eps(1)];
    REQUIRE(col.size() == 2);
    CHECK(prog.cons[col[0].con].family == pg::Family::coscone);
    CHECK(prog.cons[col[0].con].i0 == 1);
    CHECK(col[0].row == 0);
    CHECK(col[0].coef == 1.0);
    CHECK(prog.cons[col[1].con].family == pg::Family::ep_1);
    CHECK(col[1].row == -1);
}

TEST_CASE("derived multipliers and objective on a hand-solved relaxation") {
    // N = 2, R = 0: minimize Omega with w1 + w2 = 1/2, w <= Omega. Optimal
    // value 1/4. Feasible dual data: wbnd_1 multipliers 0.51, mass row 0.5.
    auto d = dual::dualize(pg::build_lp(2, 0));
    dual::eliminate(d);
    const auto& prog = d.p();
    auto pt = dual::zero_point(d);
    pt.y[prog.find(pg::Family::wbnd_1, 1)] = 0.51;
    pt.y[prog.find(pg::Family::wbnd_1, 2)] = 0.51;
    pt.y[prog.find(pg::Family::lp_mass, 1)] = 0.5;

    // Omega column: phi_0 = 1 versus 0.51 + 0.51 entering rows; the ceiling
    // pivot has coefficient -1, leaving 0.02.
    const auto om = dual::derived_multiplier(d, pt, 0);
    CHECK(om.value == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(om.terms >= 2);
    CHECK(om.abs_sum >= 2.0);
    for (int j = 1; j <= 2; ++j) {
        const auto wj = dual::derived_multiplier(d, pt, j);
        CHECK(wj.value == doctest::Approx(0.01).epsilon(1e-12));
    }

    const auto obj = dual::dual_objective(d, pt, prog.input);
    CHECK(obj.value == doctest::Approx(0.25 - 0.02).epsilon(1e-14));
    CHECK(dual::equality_residual(d, pt) == doctest::Approx(0.0).epsilon(0).scale(1e-15));

    const auto ev = dual::eval(d, pt, prog.input);
    CHECK(ev.objective.value == obj.value);
    REQUIRE(ev.rows.size() == prog.cons.size());
    int derived = 0;
    for (const auto& r : ev.rows) {
        if (r.derived) ++derived;
        CHECK_FALSE(r.cone);
    }
    CHECK(derived == 3);  // one pivot per variable
}

TEST_CASE("equality residual flags an unbalanced point") {
    auto d = dual::dualize(pg::build_lp(2, 0));
    dual::eliminate(d);
    auto pt = dual::zero_point(d);
    // Nothing supports the objective: residual is |phi_0| through the pivot.
    pt.y[d.p().find(pg::Family::lp_mass, 1)] = 0.25;
    // Derived pivot values absorb the column sums exactly, so the expanded
    // system balances to rounding regardless of the free values.
    CHECK(dual::equality_residual(d, pt) <= 1e-15);
}

TEST_CASE("parameter substitution reaches only the objective") {
    const auto in0 = full_input(6, 4, 1);
    auto in1 = in0;
    in1.h1 = 0.31;
    in1.h2 = 0.9;
    in1.p1 = 0.2;
    in1.p2 = 0.5;
    // Same program, evaluated at moved box parameters.
    auto d = dual::dualize(pg::build_full(in0));
    dual::eliminate(d);
    auto pt = dual::zero_point(d);
    const auto& prog = d.p();
    pt.y[prog.find(pg::Family::mean, 1)] = 0.125;
    pt.y[prog.find(pg::Family::c1bnd, 1)] = 0.25;
    pt.y[prog.find(pg::Family::wbnd_1, 3)] = 0.01;

    const auto e0 = dual::eval(d, pt, in0);
    const auto e1 = dual::eval(d, pt, in1);
    CHECK(e0.objective.value != e1.objective.value);
    REQUIRE(e0.rows.size() == e1.rows.size());
    for (size_t i = 0; i < e0.rows.size(); ++i) CHECK(e0.rows[i].margin == e1.rows[i].margin);

    // Moved offsets shift the objective by -(y, d-change) exactly: here the
    // mean row offset moves by -(h1' - h1) and c1bnd[1] by -(p1' - p1).
    const double want = e0.objective.value + 0.125 * (in1.h1 - in0.h1) + 0.25 * (in1.p1 - in0.p1);
    CHECK(e1.objective.value == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("bound offset substitution covers every dependence tag") {
    const auto in = full_input(6, 4, 1);
    const auto prog = pg::build_full(in);
    auto moved = in;
    moved.h1 = 0.4;
    moved.h2 = 1.1;
    moved.p1 = 0.1;
    moved.p2 = 0.6;
    for (const auto& c : prog.cons) {
        const double v = dual::bound_offset(c, moved);
        switch (c.dep) {
            case pg::DepTag::fixed: CHECK(v == c.bound.offset); break;
            case pg::DepTag::mean_h1: CHECK(v == -moved.h1); break;
            case pg::DepTag::mome_h2:
                CHECK(v == doctest::Approx(2.0 / 3.0 + moved.h2 * moved.h2 / 2.0));
                break;
            case pg::DepTag::c1_lo: CHECK(v == -moved.p1); break;
            case pg::DepTag::c1_hi: CHECK(v == moved.p2); break;
            case pg::DepTag::d1_lo: CHECK(v == -moved.q1); break;
            case pg::DepTag::d1_hi: CHECK(v == moved.q2); break;
            case pg::DepTag::cos_up:
                CHECK(v == doctest::Approx((moved.p2 * moved.p2 +
                                            std::max(moved.q1 * moved.q1, moved.q2 * moved.q2)) /
                                           2.0));
                break;
        }
    }
}

TEST_CASE("eliminate rejects programs without an admissible pivot") {
    pg::ConicProgram prog;
    prog.input.kind = pg::ProgramKind::lp;
    prog.input.N = 1;
    prog.layout = pg::VarLayout{1, 0, 0, true};
    prog.objective.add(0, 1.0);
    pg::Constraint c{pg::Family::lp_mass, 1, {}, {}, pg::DepTag::fixed, false};
    c.bound.add(0, 1.0);
    c.bound.add(1, 1.0);  // two nonzeros: no pivot row exists for either var
    prog.cons.push_back(std::move(c));
    auto d = dual::dualize(prog);
    CHECK_THROWS_AS(dual::eliminate(d), std::invalid_argument);
}
