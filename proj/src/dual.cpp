#include "minoverlap/dual.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace minoverlap::dual {

using programs::Constraint;
using programs::DepTag;
using programs::Family;

DualProgram dualize(std::shared_ptr<const programs::ConicProgram> prog) {
    DualProgram d;
    d.prog = std::move(prog);
    return d;
}

DualProgram dualize(const programs::ConicProgram& prog) {
    return dualize(std::make_shared<programs::ConicProgram>(prog));
}

void eliminate(DualProgram& d) {
    const auto& prog = d.p();
    const int n = prog.num_vars();
    d.pivot_of_var.assign(n, -1);
    d.partner_of_var.assign(n, -1);

    // Builder-designated pivots first, then any unused single-nonzero row.
    for (size_t i = 0; i < prog.cons.size(); ++i) {
        const auto& c = prog.cons[i];
        if (!c.pivot) continue;
        if (c.is_cone() || c.bound.idx.size() != 1)
            throw std::logic_error("eliminate: designated pivot is not a single-nonzero scalar row");
        const int var = c.bound.idx[0];
        if (d.pivot_of_var[var] != -1)
            throw std::logic_error("eliminate: two pivots for one variable");
        d.pivot_of_var[var] = int32_t(i);
    }
    for (size_t i = 0; i < prog.cons.size(); ++i) {
        const auto& c = prog.cons[i];
        if (c.pivot || c.is_cone() || c.bound.idx.size() != 1) continue;
        const int var = c.bound.idx[0];
        if (d.pivot_of_var[var] == -1) d.pivot_of_var[var] = int32_t(i);
    }
    for (int j = 0; j < n; ++j)
        if (d.pivot_of_var[j] == -1)
            throw std::invalid_argument("eliminate: no single-nonzero scalar row for variable " +
                                        std::to_string(j));

    // Column structure over the remaining constraints, in constraint order
    // (bound row first, then norm rows). This order is part of the
    // verification contract: derived multipliers are accumulated exactly
    // this way.
    d.columns.assign(n, {});
    std::vector<bool> is_pivot(prog.cons.size(), false);
    for (int j = 0; j < n; ++j) is_pivot[d.pivot_of_var[j]] = true;
    for (size_t i = 0; i < prog.cons.size(); ++i) {
        if (is_pivot[i]) continue;
        const auto& c = prog.cons[i];
        for (size_t t = 0; t < c.bound.idx.size(); ++t)
            d.columns[c.bound.idx[t]].push_back({int32_t(i), -1, c.bound.val[t]});
        for (size_t r = 0; r < c.norm.size(); ++r)
            for (size_t t = 0; t < c.norm[r].idx.size(); ++t)
                d.columns[c.norm[r].idx[t]].push_back({int32_t(i), int32_t(r), c.norm[r].val[t]});
    }

    // Repair partner: scalar non-pivot row whose contribution raises the
    // derived multiplier, smallest support first so the fix is local.
    for (int j = 0; j < n; ++j) {
        const double piv = prog.cons[d.pivot_of_var[j]].bound.val[0];
        int best = -1;
        size_t best_support = SIZE_MAX;
        for (const auto& term : d.columns[j]) {
            if (term.row != -1) continue;
            const auto& c = prog.cons[term.con];
            if (c.is_cone()) continue;
            if (term.coef * piv >= 0.0) continue;  // wrong direction
            if (c.bound.idx.size() < best_support) {
                best_support = c.bound.idx.size();
                best = term.con;
            }
        }
        d.partner_of_var[j] = best;
    }

    d.eliminated = true;
}

DualPoint zero_point(const DualProgram& d) {
    DualPoint pt;
    const auto& cons = d.p().cons;
    pt.y.assign(cons.size(), 0.0);
    pt.z.resize(cons.size());
    for (size_t i = 0; i < cons.size(); ++i) pt.z[i].assign(cons[i].norm.size(), 0.0);
    return pt;
}

Accumulated derived_multiplier(const DualProgram& d, const DualPoint& pt, int var) {
    if (!d.eliminated) throw std::logic_error("derived_multiplier: eliminate first");
    const auto& prog = d.p();
    Accumulated acc;
    double sum = 0.0;
    for (const auto& term : d.columns[var]) {
        const double mult = term.row < 0 ? pt.y[term.con] : pt.z[term.con][term.row];
        const double prod = term.coef * mult;
        sum += prod;
        acc.abs_sum += std::abs(prod);
        acc.terms += 1;
    }
    // phi = objective vector entry for this column.
    double phi = 0.0;
    for (size_t t = 0; t < prog.objective.idx.size(); ++t)
        if (prog.objective.idx[t] == var) phi = prog.objective.val[t];
    if (phi != 0.0) {
        acc.abs_sum += std::abs(phi);
        acc.terms += 1;
    }
    const double piv = prog.cons[d.pivot_of_var[var]].bound.val[0];
    acc.value = (phi - sum) / piv;
    if (piv != 1.0 && piv != -1.0) acc.terms += 1;  // extra rounding in the division
    return acc;
}

double bound_offset(const Constraint& c, const programs::ProgramInput& in) {
    switch (c.dep) {
        case DepTag::fixed: return c.bound.offset;
        case DepTag::mean_h1: return -in.h1;
        case DepTag::mome_h2: return 2.0 / 3.0 + in.h2 * in.h2 / 2.0;
        case DepTag::c1_lo: return -in.p1;
        case DepTag::c1_hi: return in.p2;
        case DepTag::d1_lo: return -in.q1;
        case DepTag::d1_hi: return in.q2;
        case DepTag::cos_up:
            return (in.p2 * in.p2 + std::max(in.q1 * in.q1, in.q2 * in.q2)) / 2.0;
    }
    return c.bound.offset;
}

Accumulated dual_objective(const DualProgram& d, const DualPoint& pt,
                           const programs::ProgramInput& in) {
    if (!d.eliminated) throw std::logic_error("dual_objective: eliminate first");
    const auto& prog = d.p();

    // Derived multipliers replace the stored slots for pivot rows.
    std::vector<double> y = pt.y;
    for (int j = 0; j < prog.num_vars(); ++j) {
        const int con = d.pivot_of_var[j];
        y[con] = derived_multiplier(d, pt, j).value;
    }

    Accumulated acc;
    double sum = 0.0;
    for (size_t i = 0; i < prog.cons.size(); ++i) {
        const auto& c = prog.cons[i];
        const double dterm = bound_offset(c, in) * y[i];
        sum += dterm;
        acc.abs_sum += std::abs(dterm);
        acc.terms += 1;
        for (size_t r = 0; r < c.norm.size(); ++r) {
            if (c.norm[r].offset == 0.0) continue;
            const double bterm = c.norm[r].offset * pt.z[i][r];
            sum += bterm;
            acc.abs_sum += std::abs(bterm);
            acc.terms += 1;
        }
    }
    acc.value = -sum;
    return acc;
}

Evaluation eval(const DualProgram& d, const DualPoint& pt, const programs::ProgramInput& in) {
    if (!d.eliminated) throw std::logic_error("eval: eliminate first");
    const auto& prog = d.p();
    Evaluation ev;
    ev.rows.resize(prog.cons.size());

    std::vector<char> is_pivot(prog.cons.size(), 0);
    std::vector<int32_t> var_of_pivot(prog.cons.size(), -1);
    for (int j = 0; j < prog.num_vars(); ++j) {
        is_pivot[d.pivot_of_var[j]] = 1;
        var_of_pivot[d.pivot_of_var[j]] = j;
    }

    for (size_t i = 0; i < prog.cons.size(); ++i) {
        RowEval& r = ev.rows[i];
        r.con = int32_t(i);
        const auto& c = prog.cons[i];
        if (c.is_cone()) {
            r.cone = true;
            double ss = 0.0, as = 0.0;
            for (double zv : pt.z[i]) {
                ss += zv * zv;
                as += zv * zv;
            }
            const double y2 = pt.y[i] * pt.y[i];
            r.margin = y2 - ss;
            r.abs_sum = y2 + as;
            r.terms = 1 + int(pt.z[i].size());
        } else if (is_pivot[i]) {
            const auto acc = derived_multiplier(d, pt, var_of_pivot[i]);
            r.derived = true;
            r.margin = acc.value;
            r.abs_sum = acc.abs_sum;
            r.terms = acc.terms;
        } else {
            r.margin = pt.y[i];
            r.abs_sum = std::abs(pt.y[i]);
            r.terms = 1;
        }
    }
    ev.objective = dual_objective(d, pt, in);
    return ev;
}

double equality_residual(const DualProgram& d, const DualPoint& pt) {
    if (!d.eliminated) throw std::logic_error("equality_residual: eliminate first");
    const auto& prog = d.p();
    const int n = prog.num_vars();

    std::vector<double> lhs(n, 0.0);
    std::vector<double> y = pt.y;
    for (int j = 0; j < n; ++j)
        y[d.pivot_of_var[j]] = derived_multiplier(d, pt, j).value;

    for (size_t i = 0; i < prog.cons.size(); ++i) {
        const auto& c = prog.cons[i];
        for (size_t t = 0; t < c.bound.idx.size(); ++t)
            lhs[c.bound.idx[t]] += c.bound.val[t] * y[i];
        for (size_t r = 0; r < c.norm.size(); ++r)
            for (size_t t = 0; t < c.norm[r].idx.size(); ++t)
                lhs[c.norm[r].idx[t]] += c.norm[r].val[t] * pt.z[i][r];
    }
    for (size_t t = 0; t < prog.objective.idx.size(); ++t)
        lhs[prog.objective.idx[t]] -= prog.objective.val[t];

    double worst = 0.0;
    for (double v : lhs) worst = std::max(worst, std::abs(v));
    return worst;
}

}  // namespace minoverlap::dual
