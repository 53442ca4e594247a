#include "minoverlap/program.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

#include "minoverlap/fourier.hpp"
#include "minoverlap/intervals.hpp"

namespace minoverlap::programs {

namespace {
constexpr double kPi = std::numbers::pi;
}

const char* family_name(Family f) {
    switch (f) {
        case Family::obnd: return "obnd";
        case Family::wbnd_1: return "wbnd_1";
        case Family::wbnd_2: return "wbnd_2";
        case Family::vbnd_1: return "vbnd_1";
        case Family::vbnd_2: return "vbnd_2";
        case Family::sum: return "sum";
        case Family::mean: return "mean";
        case Family::mome: return "mome";
        case Family::coscone: return "coscone";
        case Family::sin_1: return "sin_1";
        case Family::sin_2: return "sin_2";
        case Family::ckbnd_1: return "ckbnd_1";
        case Family::ckbnd_2: return "ckbnd_2";
        case Family::dkbnd_1: return "dkbnd_1";
        case Family::dkbnd_2: return "dkbnd_2";
        case Family::ep_1: return "ep_1";
        case Family::ep_2: return "ep_2";
        case Family::del_1: return "del_1";
        case Family::del_2: return "del_2";
        case Family::par: return "par";
        case Family::c1bnd: return "c1bnd";
        case Family::d1bnd: return "d1bnd";
        case Family::cosup: return "cosup";
        case Family::lp_mass: return "lp_mass";
        case Family::lp_cos: return "lp_cos";
        case Family::lp_mom: return "lp_mom";
    }
    return "?";
}

Family family_from_name(const std::string& name) {
    static const std::unordered_map<std::string, Family> map = [] {
        std::unordered_map<std::string, Family> m;
        for (int i = 0; i <= int(Family::lp_mom); ++i)
            m[family_name(Family(i))] = Family(i);
        return m;
    }();
    auto it = map.find(name);
    if (it == map.end()) throw std::invalid_argument("unknown constraint family: " + name);
    return it->second;
}

std::string Constraint::name() const {
    return std::string(family_name(family)) + "[" + std::to_string(i0) + "]";
}

void ProgramInput::validate() const {
    if (N < 1) throw std::invalid_argument("input: N must be positive");
    if (kind == ProgramKind::lp) {
        if (R < 0) throw std::invalid_argument("input: R must be nonnegative");
        return;
    }
    if (T < 1) throw std::invalid_argument("input: T must be positive");
    if (R < 0 || R >= T) throw std::invalid_argument("input: need 0 <= R < T");
    if (!(h1 >= 0.0) || !(h1 <= h2)) throw std::invalid_argument("input: need 0 <= h1 <= h2");
    if (!(p1 >= 0.0) || !(p1 <= p2)) throw std::invalid_argument("input: need 0 <= p1 <= p2");
    if (!(q1 <= q2)) throw std::invalid_argument("input: need q1 <= q2");
}

int ConicProgram::find(Family f, int i0) const {
    for (size_t i = 0; i < cons.size(); ++i)
        if (cons[i].family == f && cons[i].i0 == i0) return int(i);
    return -1;
}

ConicProgram build_lp(int N, int R) {
    ProgramInput in;
    in.kind = ProgramKind::lp;
    in.N = N;
    in.R = R;
    in.validate();

    ConicProgram prog;
    prog.input = in;
    prog.layout = VarLayout{N, 0, 0, true};
    prog.objective.add(0, 1.0);
    const auto& lay = prog.layout;
    const double L = in.L();

    auto& cons = prog.cons;
    {
        Constraint c{Family::obnd, 1, {}, {}, DepTag::fixed, true};
        c.bound.offset = 1.0;
        c.bound.add(lay.omega(), -1.0);
        cons.push_back(std::move(c));
    }
    for (int j = 1; j <= N; ++j) {
        Constraint c{Family::wbnd_1, j, {}, {}, DepTag::fixed, false};
        c.bound.add(lay.omega(), 1.0);
        c.bound.add(lay.w(j), -1.0);
        cons.push_back(std::move(c));
    }
    for (int j = 1; j <= N; ++j) {
        Constraint c{Family::wbnd_2, j, {}, {}, DepTag::fixed, true};
        c.bound.add(lay.w(j), 1.0);
        cons.push_back(std::move(c));
    }
    for (int sgn : {+1, -1}) {
        Constraint c{Family::lp_mass, sgn > 0 ? 1 : 2, {}, {}, DepTag::fixed, false};
        c.bound.offset = -sgn * (N / 4.0);
        for (int j = 1; j <= N; ++j) c.bound.add(lay.w(j), sgn * 1.0);
        cons.push_back(std::move(c));
    }
    if (R >= 1) {
        const auto env = intervals::build_envelopes(intervals::Discretization(N), R);
        for (int m = 1; m <= R; ++m) {
            Constraint c{Family::lp_cos, m, {}, {}, DepTag::fixed, false};
            for (int j = 1; j <= N; ++j) c.bound.add(lay.w(j), -env.alo(2 * m, j));
            cons.push_back(std::move(c));
        }
        Constraint c{Family::lp_mom, 1, {}, {}, DepTag::fixed, false};
        c.bound.offset = 1.0 / 3.0;
        for (int j = 1; j <= N; ++j)
            c.bound.add(lay.w(j), -L * L * L * double(j - 1) * (j - 1));
        cons.push_back(std::move(c));
    }
    return prog;
}

namespace {

// a_m and b_m as affine functions of the program variables.
AffineRow a_expr(int m, const VarLayout& lay) {
    AffineRow r;
    if (m % 2 == 0) {
        r.add(lay.c(m / 2), 0.5);
        return r;
    }
    const int sf = fourier::sine_factor(m);
    const double lead = 2.0 * m * sf / kPi;
    r.offset = lead / (2.0 * double(m) * m);  // constant from c_0 = 1/2
    r.add(lay.eps((m + 1) / 2), 1.0);
    double sign = -1.0;
    for (int k = 1; k <= lay.T; ++k) {
        r.add(lay.c(k), lead * sign / (double(m) * m - 4.0 * k * k));
        sign = -sign;
    }
    return r;
}

AffineRow b_expr(int m, const VarLayout& lay) {
    AffineRow r;
    if (m % 2 == 0) {
        r.add(lay.d(m / 2), 0.5);
        return r;
    }
    const int sf = fourier::sine_factor(m);
    const double lead = 4.0 * sf / kPi;
    r.add(lay.del((m + 1) / 2), 1.0);
    double sign = -1.0;
    for (int k = 1; k <= lay.T; ++k) {
        r.add(lay.d(k), lead * sign * k / (double(m) * m - 4.0 * k * k));
        sign = -sign;
    }
    return r;
}

AffineRow scaled(const AffineRow& r, double factor, double offset_shift = 0.0) {
    AffineRow out;
    out.offset = r.offset * factor + offset_shift;
    out.idx = r.idx;
    out.val = r.val;
    for (auto& v : out.val) v *= factor;
    return out;
}

}  // namespace

ConicProgram build_full(const ProgramInput& input) {
    ProgramInput in = input;
    in.kind = ProgramKind::full;
    in.validate();

    ConicProgram prog;
    prog.input = in;
    prog.layout = VarLayout{in.N, in.T, in.R, false};
    prog.objective.add(0, 1.0);
    const auto& lay = prog.layout;
    const int N = in.N, T = in.T, R = in.R;
    const double L = in.L();
    const auto env = intervals::build_envelopes(intervals::Discretization(N), R);

    auto& cons = prog.cons;

    {
        Constraint c{Family::obnd, 1, {}, {}, DepTag::fixed, true};
        c.bound.offset = 1.0;
        c.bound.add(lay.omega(), -1.0);
        cons.push_back(std::move(c));
    }
    for (int j = 1; j <= N; ++j) {
        Constraint c{Family::wbnd_1, j, {}, {}, DepTag::fixed, false};
        c.bound.add(lay.omega(), 1.0);
        c.bound.add(lay.w(j), -1.0);
        cons.push_back(std::move(c));
    }
    for (int j = 1; j <= N; ++j) {
        Constraint c{Family::wbnd_2, j, {}, {}, DepTag::fixed, true};
        c.bound.add(lay.w(j), 1.0);
        cons.push_back(std::move(c));
    }
    for (int j = 1; j <= N; ++j) {
        Constraint c{Family::vbnd_1, j, {}, {}, DepTag::fixed, false};
        c.bound.add(lay.omega(), 1.0);
        c.bound.add(lay.v(j), -1.0);
        cons.push_back(std::move(c));
    }
    for (int j = 1; j <= N; ++j) {
        Constraint c{Family::vbnd_2, j, {}, {}, DepTag::fixed, true};
        c.bound.add(lay.v(j), 1.0);
        cons.push_back(std::move(c));
    }
    for (int sgn : {+1, -1}) {
        Constraint c{Family::sum, sgn > 0 ? 1 : 2, {}, {}, DepTag::fixed, false};
        c.bound.offset = -sgn * 1.0;
        for (int j = 1; j <= N; ++j) {
            c.bound.add(lay.w(j), sgn * L);
            c.bound.add(lay.v(j), sgn * L);
        }
        cons.push_back(std::move(c));
    }
    {
        Constraint c{Family::mean, 1, {}, {}, DepTag::mean_h1, false};
        c.bound.offset = -in.h1;
        for (int j = 1; j <= N; ++j) {
            c.bound.add(lay.w(j), L * L * j);
            c.bound.add(lay.v(j), -L * L * (j - 1));
        }
        cons.push_back(std::move(c));
    }
    {
        Constraint c{Family::mome, 1, {}, {}, DepTag::mome_h2, false};
        c.bound.offset = fourier::second_moment_rhs(in.h2);
        for (int j = 1; j <= N; ++j) {
            const double coef = -L * L * L * double(j - 1) * (j - 1);
            c.bound.add(lay.w(j), coef);
            c.bound.add(lay.v(j), coef);
        }
        cons.push_back(std::move(c));
    }

    // Cosine cones: ||(a_m - s, b_m, (t-1)/2)|| <= (t+1)/2 where
    // t = s^2 - f_lo/2 encodes (a_m - s)^2 + b_m^2 <= t, equivalent to
    // 4 s a_m - 2(a_m^2 + b_m^2) >= f_lo, the lower envelope side of A_m.
    for (int m = 1; m <= 2 * R; ++m) {
        CosConeMeta meta;
        meta.m = m;
        meta.a_expr = a_expr(m, lay);
        // s = sf/(pi m); reuse the exact double stored as the constant term
        // of a_m so the cone's first norm row has offset exactly zero.
        meta.s = meta.a_expr.offset;
        meta.b_expr = b_expr(m, lay);
        for (int j = 1; j <= N; ++j) {
            const double coef = L / 2.0 * env.alo(m, j);
            meta.f_lo.add(lay.w(j), coef);
            meta.f_lo.add(lay.v(j), coef);
        }

        Constraint c{Family::coscone, m, {}, {}, DepTag::fixed, false};
        const AffineRow t = scaled(meta.f_lo, -0.5, meta.s * meta.s);
        c.bound = scaled(t, 0.5, 0.5);                        // (t+1)/2
        c.norm.push_back(scaled(meta.a_expr, 1.0, -meta.s));  // a_m - s
        c.norm.push_back(meta.b_expr);
        c.norm.push_back(scaled(t, 0.5, -0.5));               // (t-1)/2
        cons.push_back(std::move(c));
        prog.cone_meta.push_back(std::move(meta));
    }

    // Sine brackets: the bracket of the sine sum must admit
    // B_m = -kappa * sf/(m pi) * b_m with kappa = 4 (8 in compat mode).
    const double kappa = in.sine8 ? 8.0 : 4.0;
    for (int m = 1; m <= 2 * R; ++m) {
        const int sf = fourier::sine_factor(m);
        const double bcoef = kappa * sf / (m * kPi);
        const AffineRow bm = b_expr(m, lay);
        {
            Constraint c{Family::sin_1, m, {}, {}, DepTag::fixed, false};
            // -S_lo - kappa*s*b_m >= 0
            for (int j = 1; j <= N; ++j) {
                c.bound.add(lay.w(j), -L / 2.0 * env.blo(m, j));
                c.bound.add(lay.v(j), L / 2.0 * env.bhi(m, j));
            }
            const AffineRow tail = scaled(bm, -bcoef);
            c.bound.offset += tail.offset;
            for (size_t t = 0; t < tail.idx.size(); ++t) c.bound.add(tail.idx[t], tail.val[t]);
            cons.push_back(std::move(c));
        }
        {
            Constraint c{Family::sin_2, m, {}, {}, DepTag::fixed, false};
            // S_hi + kappa*s*b_m >= 0
            for (int j = 1; j <= N; ++j) {
                c.bound.add(lay.w(j), L / 2.0 * env.bhi(m, j));
                c.bound.add(lay.v(j), -L / 2.0 * env.blo(m, j));
            }
            const AffineRow tail = scaled(bm, bcoef);
            c.bound.offset += tail.offset;
            for (size_t t = 0; t < tail.idx.size(); ++t) c.bound.add(tail.idx[t], tail.val[t]);
            cons.push_back(std::move(c));
        }
    }

    // Tail remainder boxes at the odd frequency 2i-1.
    for (int i = 1; i <= R; ++i) {
        const double tb = fourier::tail_bound_cos(2 * i - 1, T);
        Constraint lo{Family::ep_1, i, {}, {}, DepTag::fixed, false};
        lo.bound.offset = tb;
        lo.bound.add(lay.eps(i), 1.0);
        cons.push_back(std::move(lo));
        Constraint hi{Family::ep_2, i, {}, {}, DepTag::fixed, true};
        hi.bound.offset = tb;
        hi.bound.add(lay.eps(i), -1.0);
        cons.push_back(std::move(hi));
    }
    for (int i = 1; i <= R; ++i) {
        const double tb = fourier::tail_bound_sin(2 * i - 1, T);
        Constraint lo{Family::del_1, i, {}, {}, DepTag::fixed, false};
        lo.bound.offset = tb;
        lo.bound.add(lay.del(i), 1.0);
        cons.push_back(std::move(lo));
        Constraint hi{Family::del_2, i, {}, {}, DepTag::fixed, true};
        hi.bound.offset = tb;
        hi.bound.add(lay.del(i), -1.0);
        cons.push_back(std::move(hi));
    }

    // Coefficient boxes |c_k|, |d_k| <= 2/pi.
    const double box = 2.0 / kPi;
    for (int k = 1; k <= T; ++k) {
        Constraint lo{Family::ckbnd_1, k, {}, {}, DepTag::fixed, false};
        lo.bound.offset = box;
        lo.bound.add(lay.c(k), 1.0);
        cons.push_back(std::move(lo));
        Constraint hi{Family::ckbnd_2, k, {}, {}, DepTag::fixed, true};
        hi.bound.offset = box;
        hi.bound.add(lay.c(k), -1.0);
        cons.push_back(std::move(hi));
    }
    for (int k = 1; k <= T; ++k) {
        Constraint lo{Family::dkbnd_1, k, {}, {}, DepTag::fixed, false};
        lo.bound.offset = box;
        lo.bound.add(lay.d(k), 1.0);
        cons.push_back(std::move(lo));
        Constraint hi{Family::dkbnd_2, k, {}, {}, DepTag::fixed, true};
        hi.bound.offset = box;
        hi.bound.add(lay.d(k), -1.0);
        cons.push_back(std::move(hi));
    }

    {
        Constraint c{Family::par, 1, {}, {}, DepTag::fixed, false};
        c.bound.offset = 1.0 / std::sqrt(2.0);
        for (int k = 1; k <= T; ++k) {
            AffineRow r;
            r.add(lay.c(k), 1.0);
            c.norm.push_back(std::move(r));
        }
        for (int k = 1; k <= T; ++k) {
            AffineRow r;
            r.add(lay.d(k), 1.0);
            c.norm.push_back(std::move(r));
        }
        cons.push_back(std::move(c));
    }

    {
        Constraint c{Family::c1bnd, 1, {}, {}, DepTag::c1_lo, false};
        c.bound.offset = -in.p1;
        c.bound.add(lay.c(1), 1.0);
        cons.push_back(std::move(c));
    }
    {
        Constraint c{Family::c1bnd, 2, {}, {}, DepTag::c1_hi, false};
        c.bound.offset = in.p2;
        c.bound.add(lay.c(1), -1.0);
        cons.push_back(std::move(c));
    }
    {
        Constraint c{Family::d1bnd, 1, {}, {}, DepTag::d1_lo, false};
        c.bound.offset = -in.q1;
        c.bound.add(lay.d(1), 1.0);
        cons.push_back(std::move(c));
    }
    {
        Constraint c{Family::d1bnd, 2, {}, {}, DepTag::d1_hi, false};
        c.bound.offset = in.q2;
        c.bound.add(lay.d(1), -1.0);
        cons.push_back(std::move(c));
    }

    if (R >= 1) {
        // Upper envelope of A_2 must clear the worst case of
        // A_2 = -(c_1^2 + d_1^2)/2 over the (p, q) windows.
        Constraint c{Family::cosup, 1, {}, {}, DepTag::cos_up, false};
        const double qmax = std::max(in.q1 * in.q1, in.q2 * in.q2);
        c.bound.offset = (in.p2 * in.p2 + qmax) / 2.0;
        for (int j = 1; j <= N; ++j) {
            const double coef = L / 2.0 * env.ahi(2, j);
            c.bound.add(lay.w(j), coef);
            c.bound.add(lay.v(j), coef);
        }
        cons.push_back(std::move(c));
    }

    return prog;
}

std::vector<double> quadratic_residuals(const ConicProgram& prog, const std::vector<double>& x) {
    if (int(x.size()) != prog.num_vars())
        throw std::invalid_argument("quadratic_residuals: x size mismatch");
    std::vector<double> out;
    out.reserve(prog.cons.size());
    for (const auto& c : prog.cons) {
        double r = c.bound.eval(x.data());
        if (c.is_cone()) {
            double ss = 0.0;
            for (const auto& row : c.norm) {
                const double v = row.eval(x.data());
                ss += v * v;
            }
            r -= std::sqrt(ss);
        }
        out.push_back(r);
    }
    return out;
}

double min_residual(const ConicProgram& prog, const std::vector<double>& x, std::string* argmin) {
    const auto res = quadratic_residuals(prog, x);
    size_t best = 0;
    for (size_t i = 1; i < res.size(); ++i)
        if (res[i] < res[best]) best = i;
    if (argmin) *argmin = prog.cons[best].name();
    return res[best];
}

double cos_quadratic_residual(const ConicProgram& prog, int cone_index, const std::vector<double>& x) {
    const auto& meta = prog.cone_meta.at(cone_index);
    const double a = meta.a_expr.eval(x.data());
    const double b = meta.b_expr.eval(x.data());
    const double f = meta.f_lo.eval(x.data());
    return 4.0 * meta.s * a - 2.0 * (a * a + b * b) - f;
}

}  // namespace minoverlap::programs
