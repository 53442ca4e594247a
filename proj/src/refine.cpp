#include <cstdio>
#include <cstdlib>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "minoverlap/solver.hpp"

// Dual refinement by partial maximization. Every variable column can be
// closed exactly through its pivot row and its repair partner: the two
// carry opposite signs on the column, so for any residual exactly one of
// them takes a nonnegative value (the minimal complementary pair). Fixing
// the remaining "dense" multipliers theta and closing all columns this way
// yields an exactly feasible dual point whose objective G(theta) is concave
// and piecewise linear. The solver's theta estimate is then improved by
// exact line searches, first along coordinates, then along coordinate pairs
// to slide out of the corners where cyclic search stalls.

namespace minoverlap::solver {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool twin_head(const programs::ConicProgram& prog, int i) {
    using programs::Family;
    if (size_t(i) + 1 >= prog.cons.size()) return false;
    const auto& a = prog.cons[i];
    const auto& b = prog.cons[i + 1];
    return (a.family == Family::sum || a.family == Family::lp_mass) && b.family == a.family &&
           a.i0 == 1 && b.i0 == 2;
}

struct VarClose {
    int32_t piv = -1, par = -1;   // constraint indices
    double cp = 0.0, cq = 0.0;    // their coefficients on this column
    double dp = 0.0, dq = 0.0;    // their objective offsets
    double com = 0.0;             // partner coefficient on the objective column
};

struct DenseRow {
    int32_t con = 0;
    bool twin = false;                             // sign-free pair head
    double d = 0.0;                                // objective offset
    std::vector<std::pair<int32_t, double>> cols;  // (variable, coefficient)
};

}  // namespace

dual::DualPoint refine_support(const dual::DualProgram& d, const Solution& sol, int max_sweeps) {
    const auto& prog = d.p();
    const auto& cons = prog.cons;
    const int nv = prog.num_vars();
    const int nc = int(cons.size());
    if (!d.eliminated) throw std::invalid_argument("refine: dual not eliminated");

    // The objective column (the variable being minimized) is closed last and
    // must be a single variable.
    if (prog.objective.idx.size() != 1)
        throw std::invalid_argument("refine: objective must be a single variable");
    const int vo = prog.objective.idx[0];

    std::vector<char> closure_row(nc, 0);
    std::vector<VarClose> vc(nv);
    auto single_coef = [&](int con, int v) {
        const auto& b = cons[con].bound;
        for (size_t t = 0; t < b.idx.size(); ++t)
            if (b.idx[t] == v) return b.val[t];
        return 0.0;
    };
    for (int v = 0; v < nv; ++v) {
        vc[v].piv = d.pivot_of_var[v];
        closure_row[vc[v].piv] = 1;
        vc[v].cp = single_coef(vc[v].piv, v);
        vc[v].dp = cons[vc[v].piv].bound.offset;
        if (v == vo) continue;
        int par = d.partner_of_var[v];
        if (par < 0) throw std::invalid_argument("refine: variable without repair partner");
        const auto& pb = cons[par].bound;
        if (pb.idx.size() > 2) throw std::invalid_argument("refine: wide partner row");
        closure_row[par] = 1;
        vc[v].par = par;
        vc[v].cq = single_coef(par, v);
        vc[v].dq = pb.offset;
        vc[v].com = single_coef(par, vo);
        if (vc[v].cp == 0.0 || vc[v].cq == 0.0 || vc[v].cp * vc[v].cq > 0.0)
            throw std::invalid_argument("refine: unusable pivot/partner pair");
        // Convexity of the per-column closure cost in its residual: the
        // slope right of the kink must not undercut the slope left of it.
        double sp = vc[v].dp / vc[v].cp, sq = vc[v].dq / vc[v].cq;
        double right = vc[v].cp > 0.0 ? sp : sq;
        double left = vc[v].cp > 0.0 ? sq : sp;
        if (right < left) throw std::invalid_argument("refine: nonconvex closure pair");
        for (size_t t = 0; t < pb.idx.size(); ++t)
            if (pb.idx[t] != v && pb.idx[t] != vo)
                throw std::invalid_argument("refine: partner couples two columns");
    }
    const double cpo = vc[vo].cp, dpo = vc[vo].dp;
    if (dpo < 0.0) throw std::invalid_argument("refine: negative objective pivot cost");
    // Concavity of the closed objective needs the partner contributions to
    // push the objective pivot toward its costly side consistently.
    for (int v = 0; v < nv; ++v)
        if (v != vo && vc[v].com != 0.0 && vc[v].com / cpo > 0.0)
            throw std::invalid_argument("refine: partner sign breaks concavity");

    // Dense rows: every free scalar row not used for column closure.
    std::vector<DenseRow> dr;
    std::vector<char> skip(nc, 0);
    for (int i = 0; i < nc; ++i) {
        if (cons[i].is_cone() || closure_row[i] || skip[i]) continue;
        DenseRow r;
        r.con = i;
        r.twin = twin_head(prog, i);
        if (r.twin) skip[i + 1] = 1;
        r.d = cons[i].bound.offset;
        const auto& b = cons[i].bound;
        for (size_t t = 0; t < b.idx.size(); ++t) {
            if (b.idx[t] == vo) throw std::invalid_argument("refine: dense row on objective column");
            r.cols.emplace_back(b.idx[t], b.val[t]);
        }
        dr.push_back(std::move(r));
    }

    // Fixed cone contributions and the objective right side, per column.
    std::vector<double> rho_fix(nv, 0.0);
    rho_fix[vo] = prog.objective.val[0];
    for (int i = 0; i < nc; ++i) {
        if (!cons[i].is_cone()) continue;
        const auto& b = cons[i].bound;
        for (size_t t = 0; t < b.idx.size(); ++t) rho_fix[b.idx[t]] -= sol.point.y[i] * b.val[t];
        for (size_t r = 0; r < cons[i].norm.size(); ++r) {
            const auto& nr = cons[i].norm[r];
            for (size_t t = 0; t < nr.idx.size(); ++t)
                rho_fix[nr.idx[t]] -= sol.point.z[i][r] * nr.val[t];
        }
    }

    // Starting point from the solver's multipliers.
    const size_t nd = dr.size();
    std::vector<double> theta(nd);
    for (size_t k = 0; k < nd; ++k) {
        double y = sol.point.y[dr[k].con];
        theta[k] = dr[k].twin ? y - sol.point.y[dr[k].con + 1] : std::max(y, 0.0);
    }

    // Column residuals for the current theta and the derived value of the
    // objective pivot multiplier.
    std::vector<double> rho(nv);
    double vom = 0.0;
    auto rebuild = [&] {
        rho = rho_fix;
        for (size_t k = 0; k < nd; ++k)
            for (const auto& [v, a] : dr[k].cols) rho[v] -= theta[k] * a;
        double s = rho[vo];
        for (int v = 0; v < nv; ++v) {
            if (v == vo || vc[v].com == 0.0) continue;
            double q = rho[v] / vc[v].cq;
            if (q > 0.0) s -= vc[v].com * q;
        }
        vom = s / cpo;
    };

    // Total closure cost (negated dual objective up to the fixed cone
    // part); lower is better.
    auto closure_cost = [&] {
        double cost = 0.0;
        for (size_t k = 0; k < nd; ++k) cost += dr[k].d * theta[k];
        for (int v = 0; v < nv; ++v) {
            if (v == vo) continue;
            double p = rho[v] / vc[v].cp;
            if (p > 0.0) cost += vc[v].dp * p;
            else cost += vc[v].dq * (rho[v] / vc[v].cq);
        }
        cost += dpo * std::max(vom, 0.0);
        return cost;
    };

    rebuild();
    double cost = closure_cost();

    // Effective column data of a search direction g (sparse over dense
    // rows): a_eff(v) = sum_k g_k a_kv, plus the direction's offset and the
    // step bound keeping nonnegative coordinates nonnegative.
    struct DirData {
        std::vector<std::pair<int32_t, double>> cols;
        double d = 0.0;
        double limit_pos = kInf, limit_neg = kInf;
    };
    std::vector<double> acc(nv, 0.0);
    std::vector<char> seen(nv, 0);
    std::vector<int32_t> touched;
    auto build_dir = [&](const std::vector<std::pair<size_t, double>>& g, DirData& dd) {
        dd.cols.clear();
        dd.d = 0.0;
        dd.limit_pos = dd.limit_neg = kInf;
        touched.clear();
        for (const auto& [k, w] : g) {
            dd.d += w * dr[k].d;
            for (const auto& [v, a] : dr[k].cols) {
                if (!seen[v]) {
                    seen[v] = 1;
                    touched.push_back(v);
                    acc[v] = 0.0;
                }
                acc[v] += w * a;
            }
            if (!dr[k].twin && w != 0.0) {
                double cap = theta[k] / std::abs(w);
                if (w > 0.0) dd.limit_neg = std::min(dd.limit_neg, cap);
                else dd.limit_pos = std::min(dd.limit_pos, cap);
            }
        }
        std::sort(touched.begin(), touched.end());
        for (int32_t v : touched) {
            if (acc[v] != 0.0) dd.cols.emplace_back(v, acc[v]);
            seen[v] = 0;
        }
    };

    // Exact line search along the direction in direction dir: returns the
    // signed step to the first point where the cost slope turns
    // nonnegative. Ties at kink boundaries may cut a step short; the caller
    // only accepts strict improvements, so that is harmless.
    struct Ev {
        double s;
        int32_t t;
    };
    std::vector<Ev> evs;
    auto line_step = [&](const DirData& dd, int dir) {
        const auto& cols = dd.cols;
        evs.clear();
        double slope = dir * dd.d;
        double vslope = 0.0;
        for (size_t t = 0; t < cols.size(); ++t) {
            const auto& [v, a] = cols[t];
            const double da = -dir * a;  // d rho_v / d s
            const auto& c = vc[v];
            double p = rho[v] / c.cp;
            bool on_p = p > 0.0 || (p == 0.0 && da / c.cp > 0.0);
            if (on_p) slope += c.dp * da / c.cp;
            else slope += c.dq * da / c.cq;
            if (!on_p && c.com != 0.0) vslope -= c.com * (da / c.cq) / cpo;
            double s = dir * rho[v] / a;
            if (s > 0.0) evs.push_back({s, int32_t(t)});
        }
        double vcur = vom;
        bool von = vcur > 0.0 || (vcur == 0.0 && vslope > 0.0);
        if (von) slope += dpo * vslope;
        if (slope > 0.0) return 0.0;
        const double limit = dir > 0 ? dd.limit_pos : dd.limit_neg;
        std::sort(evs.begin(), evs.end(), [](const Ev& a, const Ev& b) {
            return a.s < b.s || (a.s == b.s && a.t < b.t);
        });
        double scur = 0.0;
        size_t e = 0;
        while (true) {
            double snext = std::min(e < evs.size() ? evs[e].s : kInf, limit);
            // Sign change of the objective pivot inside the segment.
            if (von != (vslope > 0.0) && vslope != 0.0) {
                double sx = scur + (0.0 - vcur) / vslope;
                if (sx > scur && sx < snext) {
                    vcur = 0.0;
                    scur = sx;
                    slope += dpo * (von ? -vslope : vslope);
                    von = !von;
                    if (slope > 0.0) return dir * scur;
                }
            }
            if (!std::isfinite(snext)) return dir * scur;  // numerically flat tail
            if (snext >= limit) return dir * limit;
            vcur += vslope * (snext - scur);
            scur = snext;
            const auto& [v, a] = cols[evs[e].t];
            const double da = -dir * a;
            const auto& c = vc[v];
            bool now_p = da / c.cp > 0.0;  // closure side after the crossing
            slope += now_p ? c.dp * da / c.cp - c.dq * da / c.cq
                           : c.dq * da / c.cq - c.dp * da / c.cp;
            if (c.com != 0.0) {
                double dv = c.com * (da / c.cq) / cpo;
                vslope += now_p ? dv : -dv;
                if (von) slope += dpo * (now_p ? dv : -dv);
            }
            ++e;
            if (slope > 0.0) return dir * scur;
        }
    };

    // One searched direction: steps, re-closes, keeps strict improvements.
    DirData dd;
    auto try_dir = [&](const std::vector<std::pair<size_t, double>>& g) {
        build_dir(g, dd);
        if (dd.cols.empty()) return false;
        for (int dir : {+1, -1}) {
            double s = line_step(dd, dir);
            if (s == 0.0 || !std::isfinite(s)) continue;
            for (const auto& [k, w] : g) theta[k] += s * w;
            rebuild();
            double c2 = closure_cost();
            if (c2 < cost) {
                cost = c2;
                return true;
            }
            for (const auto& [k, w] : g) theta[k] -= s * w;
            rebuild();
        }
        return false;
    };

    auto ascend = [&](int sweeps) {
        for (int sweep = 0; sweep < sweeps; ++sweep) {
            double before = cost;
            for (size_t k = 0; k < nd; ++k) try_dir({{k, 1.0}});
            if (!(before - cost > 1e-14 * (1.0 + std::abs(cost)))) break;
        }
    };

    // Pairwise directions slide along single kink hyperplanes and unjam the
    // corners where coordinate search stalls. Wide programs only pair
    // nearby rows to keep the cost quadratic-free.
    auto pair_round = [&] {
        double before = cost;
        const size_t band = nd > 64 ? 8 : nd;
        for (size_t k = 0; k < nd; ++k)
            for (size_t l = k + 1; l < std::min(nd, k + 1 + band); ++l)
                for (double w : {1.0, -1.0}) try_dir({{k, 1.0}, {l, w}});
        return cost < before - 1e-14 * (1.0 + std::abs(cost));
    };

    // Dense rows differ in scale by orders of magnitude, so the bundle
    // works in row-normalized coordinates: gradients are multiplied by the
    // inverse row norm and directions mapped back the same way.
    std::vector<double> dscale(nd);
    for (size_t k = 0; k < nd; ++k) {
        double s = dr[k].d * dr[k].d;
        for (const auto& [v, a] : dr[k].cols) s += a * a;
        dscale[k] = s > 0.0 ? 1.0 / std::sqrt(s) : 1.0;
    }

    // Scaled subgradient of the cost at the current theta. With a direction
    // (sd, dir) the sides of exactly-kinked columns follow the movement,
    // giving the gradient of the piece entered along that ray; those
    // one-sided gradients are what blocked corners are made of. Without a
    // direction, ties take the q side.
    std::vector<double> aeff(nv, 0.0);
    auto gradient = [&](const DirData* sd, int dir) {
        if (sd)
            for (const auto& [v, a] : sd->cols) aeff[v] = a;
        const bool von = vom > 0.0;
        std::vector<double> g(nd, 0.0);
        for (size_t k = 0; k < nd; ++k) {
            double s = dr[k].d;
            for (const auto& [v, a] : dr[k].cols) {
                const auto& c = vc[v];
                double p = rho[v] / c.cp;
                bool on_p = p > 0.0;
                if (p == 0.0 && sd) on_p = (-dir * aeff[v]) / c.cp > 0.0;
                if (on_p) {
                    s -= c.dp * a / c.cp;
                } else {
                    s -= c.dq * a / c.cq;
                    if (von && c.com != 0.0) s += dpo * c.com * a / (c.cq * cpo);
                }
            }
            g[k] = s * dscale[k];
        }
        if (sd)
            for (const auto& [v, a] : sd->cols) aeff[v] = 0.0;
        return g;
    };

    auto full_dir = [&](const std::vector<double>& gh) {
        double gn = 0.0;
        for (size_t k = 0; k < nd; ++k) gn = std::max(gn, std::abs(gh[k] * dscale[k]));
        std::vector<std::pair<size_t, double>> g;
        if (gn > 0.0)
            for (size_t k = 0; k < nd; ++k)
                if (std::abs(gh[k] * dscale[k]) > 1e-12 * gn)
                    g.emplace_back(k, -gh[k] * dscale[k] / gn);
        return g;
    };

    // Slide along the active edge of the objective pivot hinge: when the
    // sup-norm row is slack, optimal points sit exactly on vom = 0 and the
    // cost is flat on the off side, so plain descent stalls against the
    // hinge. Projecting the gradient onto the tangent of vom(theta) = 0
    // recovers the sliding directions with the exact coordinate ratios that
    // coordinate and pair moves cannot represent.
    auto hinge_round = [&] {
        double before = cost;
        std::vector<double> n(nd), t(nd);
        for (int it = 0; it < 240; ++it) {
            auto g = gradient(nullptr, 0);
            double nn = 0.0, gn2 = 0.0, gdn = 0.0;
            for (size_t k = 0; k < nd; ++k) {
                double s = 0.0;
                for (const auto& [v, a] : dr[k].cols) {
                    const auto& c = vc[v];
                    if (c.com != 0.0 && rho[v] / c.cq > 0.0) s += c.com * a / (c.cq * cpo);
                }
                n[k] = s * dscale[k];
                nn += n[k] * n[k];
                gn2 += g[k] * g[k];
                gdn += g[k] * n[k];
            }
            bool moved = gn2 > 0.0 && try_dir(full_dir(g));
            if (!moved && nn > 0.0) {
                for (size_t k = 0; k < nd; ++k) t[k] = g[k] - (gdn / nn) * n[k];
                moved = try_dir(full_dir(t));
            }
            if (!moved) break;
        }
        return cost < before - 1e-14 * (1.0 + std::abs(cost));
    };

    // Global descent over the dense multipliers by cutting planes: the
    // closed cost is convex piecewise linear in theta, each evaluation
    // yields an exact subgradient cut, and the master (a box LP over the
    // scaled coordinates) is solved by the conic solver itself. Unlike the
    // local walks this converges from any starting point.
    const bool dbg = std::getenv("REFINE_DEBUG") != nullptr;
    auto plane_round = [&] {
        const double kBox = 32.0;
        const double before = cost;
        const std::vector<double> theta0 = theta;
        std::vector<double> lo(nd, -kBox), hi(nd, kBox);
        for (size_t k = 0; k < nd; ++k)
            if (!dr[k].twin) lo[k] = std::max(-kBox, -theta0[k] / dscale[k]);

        std::vector<double> best_xi(nd, 0.0), xi(nd, 0.0);
        double best = cost;
        struct Cut {
            double c;
            std::vector<double> g, xi;
        };
        std::vector<Cut> cuts;
        auto eval_cut = [&](const std::vector<double>& at) {
            for (size_t k = 0; k < nd; ++k)
                theta[k] = theta0[k] + dscale[k] * std::max(lo[k], std::min(hi[k], at[k]));
            rebuild();
            double c = closure_cost();
            cuts.push_back({c, gradient(nullptr, 0), at});
            return c;
        };
        eval_cut(xi);

        programs::ConicProgram master;
        master.layout.lp = true;
        master.layout.N = int(nd);
        master.input.kind = programs::ProgramKind::lp;
        master.objective.add(0, 1.0);
        for (size_t k = 0; k < nd; ++k) {
            programs::Constraint cb;
            cb.family = programs::Family::obnd;
            cb.bound.add(int32_t(1 + k), 1.0);
            cb.bound.offset = -lo[k];
            master.cons.push_back(cb);
            programs::Constraint ct;
            ct.family = programs::Family::obnd;
            ct.bound.add(int32_t(1 + k), -1.0);
            ct.bound.offset = hi[k];
            master.cons.push_back(ct);
        }
        SolveOptions mopt;
        mopt.eps = 1e-10;
        mopt.max_iters = 20000;
        mopt.verbose = 0;

        // Recentering shrinks the box around the incumbent when the master
        // goes degenerate before the gap closes; cuts stay valid globally.
        double width = kBox;
        std::vector<double> center(nd, 0.0);
        auto set_box = [&] {
            for (size_t k = 0; k < nd; ++k) {
                double cap = dr[k].twin ? -kInf : -theta0[k] / dscale[k];
                lo[k] = std::max(center[k] - width, cap);
                hi[k] = center[k] + width;
                master.cons[2 * k].bound.offset = -lo[k];
                master.cons[2 * k + 1].bound.offset = hi[k];
            }
        };
        int stall = 0, shrinks = 0;
        for (int it = 0; it < 400; ++it) {
            {
                const Cut& u = cuts.back();
                programs::Constraint cc;
                cc.family = programs::Family::obnd;
                cc.bound.add(0, 1.0);
                double gdx = 0.0;
                for (size_t k = 0; k < nd; ++k) {
                    cc.bound.add(int32_t(1 + k), -u.g[k]);
                    gdx += u.g[k] * u.xi[k];
                }
                cc.bound.offset = gdx - u.c;
                master.cons.push_back(cc);
            }
            auto ms = solve(master, mopt);
            bool ok = ms.x.size() == nd + 1;
            for (size_t k = 0; ok && k <= nd; ++k) ok = std::isfinite(ms.x[k]);
            if (!ok) break;
            for (size_t k = 0; k < nd; ++k) xi[k] = ms.x[1 + k];
            double c = eval_cut(xi);
            bool improved = c < best - 1e-13 * (1.0 + std::abs(best));
            if (c < best) {
                best = c;
                best_xi = xi;
            }
            stall = improved ? 0 : stall + 1;
            const bool tight = ms.status == SolveStatus::optimal;
            if (dbg)
                std::fprintf(stderr, "plane it=%d cuts=%zu t*=%.12f tight=%d eval=%.12f best=%.12f\n",
                             it, cuts.size(), ms.x[0], int(tight), c, best);
            if (tight && best - ms.x[0] <= 1e-10 * (1.0 + std::abs(best))) {
                if (width <= kBox / 16.0 || shrinks >= 6) break;
                width /= 4.0;
                center = best_xi;
                set_box();
                ++shrinks;
                stall = 0;
            } else if (stall >= 20) {
                if (++shrinks > 6) break;
                width /= 2.0;
                center = best_xi;
                set_box();
                stall = 0;
                if (!tight && mopt.max_iters < 80000) mopt.max_iters *= 2;
            }
        }
        for (size_t k = 0; k < nd; ++k)
            theta[k] = theta0[k] + dscale[k] * std::max(lo[k], std::min(hi[k], best_xi[k]));
        rebuild();
        cost = closure_cost();
        return cost < before - 1e-14 * (1.0 + std::abs(cost));
    };

    ascend(max_sweeps);
    for (int round = 0; round < 6; ++round) {
        if (!pair_round()) break;
        ascend(4);
    }
    for (int round = 0; round < 4; ++round) {
        bool p = plane_round();
        bool h = hinge_round();
        if (h || p) {
            ascend(4);
            pair_round();
        }
        if (!h && !p) break;
    }

    // Assemble the refined point: dense rows, partner closures, and a
    // zero-cost pair bump when the objective pivot would go negative.
    dual::DualPoint out = dual::zero_point(d);
    for (int i = 0; i < nc; ++i)
        if (cons[i].is_cone()) out.y[i] = sol.point.y[i], out.z[i] = sol.point.z[i];
    for (size_t k = 0; k < nd; ++k) {
        if (dr[k].twin) {
            out.y[dr[k].con] = std::max(theta[k], 0.0);
            out.y[dr[k].con + 1] = std::max(-theta[k], 0.0);
        } else {
            out.y[dr[k].con] = std::max(theta[k], 0.0);
        }
    }
    for (int v = 0; v < nv; ++v) {
        if (v == vo) continue;
        double q = rho[v] / vc[v].cq;
        if (q > 0.0) out.y[vc[v].par] = q;
    }
    if (vom < 0.0) {
        int vb = -1;
        for (int v = 0; v < nv; ++v)
            if (v != vo && vc[v].com != 0.0 && vc[v].dp == 0.0 && vc[v].dq == 0.0) {
                vb = v;
                break;
            }
        if (vb < 0) throw std::invalid_argument("refine: no zero-cost pair for the deficit");
        out.y[vc[vb].par] += vom * cpo / vc[vb].com;
    }
    return out;
}

}  // namespace minoverlap::solver
