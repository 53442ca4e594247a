#include "minoverlap/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace minoverlap::solver {

using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::max_iters: return "max_iters";
        case SolveStatus::primal_infeasible: return "primal_infeasible";
        case SolveStatus::dual_infeasible: return "dual_infeasible";
    }
    return "?";
}

namespace {

// Standard form: minimize c'x s.t. Ax + s = b, s in K, where K is a product
// of nonnegative rays (one per scalar constraint) and second order cones
// (bound row first).
struct ConeBlock {
    int offset = 0;
    int dim = 0;       // 1 for a ray, 1 + norm rows for a cone
    bool soc = false;
    bool zero = false;  // equality row: s pinned at 0, multiplier free
    int con = -1;       // source constraint
    int twin = -1;      // negated partner constraint folded into this row
};

struct StandardForm {
    int n = 0, m = 0;
    SpMat A;
    VectorXd b, c;
    std::vector<ConeBlock> blocks;
};

// Opposite-inequality pairs (mass rows) are merged into one equality row so
// the dual optimal set loses the free (y1+t, y2+t) line that stalls the
// splitting iteration; extraction splits the free multiplier by sign.
bool twin_pair(const programs::ConicProgram& prog, size_t i) {
    using programs::Family;
    if (i + 1 >= prog.cons.size()) return false;
    const auto& a = prog.cons[i];
    const auto& b = prog.cons[i + 1];
    return (a.family == Family::sum || a.family == Family::lp_mass) && b.family == a.family &&
           a.i0 == 1 && b.i0 == 2;
}

StandardForm to_standard(const programs::ConicProgram& prog) {
    StandardForm sf;
    sf.n = prog.num_vars();
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> bvals;
    int row = 0;
    for (size_t i = 0; i < prog.cons.size(); ++i) {
        const auto& con = prog.cons[i];
        ConeBlock blk;
        blk.offset = row;
        blk.soc = con.is_cone();
        blk.dim = 1 + int(con.norm.size());
        blk.con = int(i);
        if (twin_pair(prog, i)) {
            blk.zero = true;
            blk.twin = int(i) + 1;
            ++i;
        }
        // s_row = bound(x) means A row = -coeffs, b entry = offset.
        for (size_t t = 0; t < con.bound.idx.size(); ++t)
            trip.emplace_back(row, con.bound.idx[t], -con.bound.val[t]);
        bvals.push_back(con.bound.offset);
        ++row;
        for (const auto& nr : con.norm) {
            for (size_t t = 0; t < nr.idx.size(); ++t)
                trip.emplace_back(row, nr.idx[t], -nr.val[t]);
            bvals.push_back(nr.offset);
            ++row;
        }
        sf.blocks.push_back(blk);
    }
    sf.m = row;
    sf.A.resize(sf.m, sf.n);
    sf.A.setFromTriplets(trip.begin(), trip.end());
    sf.A.makeCompressed();
    sf.b = Eigen::Map<const VectorXd>(bvals.data(), sf.m);
    sf.c = VectorXd::Zero(sf.n);
    for (size_t t = 0; t < prog.objective.idx.size(); ++t)
        sf.c[prog.objective.idx[t]] = prog.objective.val[t];
    return sf;
}

// Project blockwise. Rays and second order cones are self-dual; equality
// blocks differ per side: the multiplier (dual side) is free, the slack is
// pinned at zero.
void project_cone(const std::vector<ConeBlock>& blocks, Eigen::Ref<VectorXd> y,
                  bool dual_side = true) {
    for (const auto& blk : blocks) {
        if (blk.zero) {
            if (!dual_side) y[blk.offset] = 0.0;
            continue;
        }
        if (!blk.soc) {
            if (y[blk.offset] < 0.0) y[blk.offset] = 0.0;
            continue;
        }
        const int o = blk.offset, d = blk.dim;
        const double t = y[o];
        double nz = 0.0;
        for (int i = 1; i < d; ++i) nz += y[o + i] * y[o + i];
        nz = std::sqrt(nz);
        if (nz <= t) continue;
        if (nz <= -t) {
            for (int i = 0; i < d; ++i) y[o + i] = 0.0;
            continue;
        }
        const double scale = (t + nz) / (2.0 * nz);
        y[o] = (t + nz) / 2.0;
        for (int i = 1; i < d; ++i) y[o + i] *= scale;
    }
}

// Ruiz equilibration with rows scaled uniformly inside each cone block.
struct Scaling {
    VectorXd D, E;  // row and column scales
    double beta = 1.0, gamma = 1.0;
};

Scaling equilibrate(StandardForm& sf) {
    Scaling sc;
    sc.D = VectorXd::Ones(sf.m);
    sc.E = VectorXd::Ones(sf.n);
    VectorXd rmax(sf.m), cmax(sf.n);
    for (int pass = 0; pass < 10; ++pass) {
        rmax.setZero();
        cmax.setZero();
        for (int j = 0; j < sf.A.outerSize(); ++j)
            for (SpMat::InnerIterator it(sf.A, j); it; ++it) {
                const double a = std::abs(it.value());
                if (a > rmax[it.row()]) rmax[it.row()] = a;
                if (a > cmax[j]) cmax[j] = a;
            }
        for (const auto& blk : sf.blocks) {
            if (blk.dim == 1) continue;
            double bm = 0.0;
            for (int i = 0; i < blk.dim; ++i) bm = std::max(bm, rmax[blk.offset + i]);
            for (int i = 0; i < blk.dim; ++i) rmax[blk.offset + i] = bm;
        }
        bool done = true;
        for (int i = 0; i < sf.m; ++i) {
            if (rmax[i] == 0.0) { rmax[i] = 1.0; continue; }
            if (rmax[i] > 2.0 || rmax[i] < 0.5) done = false;
        }
        for (int j = 0; j < sf.n; ++j) {
            if (cmax[j] == 0.0) { cmax[j] = 1.0; continue; }
            if (cmax[j] > 2.0 || cmax[j] < 0.5) done = false;
        }
        if (done) break;
        for (int i = 0; i < sf.m; ++i) rmax[i] = 1.0 / std::sqrt(rmax[i]);
        for (int j = 0; j < sf.n; ++j) cmax[j] = 1.0 / std::sqrt(cmax[j]);
        for (int j = 0; j < sf.A.outerSize(); ++j)
            for (SpMat::InnerIterator it(sf.A, j); it; ++it)
                it.valueRef() *= rmax[it.row()] * cmax[j];
        sc.D = sc.D.cwiseProduct(rmax);
        sc.E = sc.E.cwiseProduct(cmax);
    }
    sf.b = sf.b.cwiseProduct(sc.D);
    sf.c = sf.c.cwiseProduct(sc.E);
    const double bn = sf.b.norm(), cn = sf.c.norm();
    sc.beta = bn > 1e-12 ? 1.0 / bn : 1.0;
    sc.gamma = cn > 1e-12 ? 1.0 / cn : 1.0;
    sf.b *= sc.beta;
    sf.c *= sc.gamma;
    return sc;
}

}  // namespace

Solution solve(const programs::ConicProgram& prog, const SolveOptions& opts) {
    StandardForm sf = to_standard(prog);
    StandardForm orig = sf;  // unscaled copy for residual checks
    Scaling sc;
    if (opts.normalize) sc = equilibrate(sf);

    const int n = sf.n, m = sf.m;

    // Splitting metric P = diag(I_n, rho I_m, 1): fixed points are
    // unchanged, the multiplier block moves on a different clock.
    const double rho = opts.rho > 0.0 ? opts.rho : 1.0;

    // KKT matrix [[I, A'], [A, -rho I]], lower triangle.
    SpMat K(n + m, n + m);
    {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(size_t(sf.A.nonZeros()) + n + m);
        for (int i = 0; i < n; ++i) trip.emplace_back(i, i, 1.0);
        for (int j = 0; j < sf.A.outerSize(); ++j)
            for (SpMat::InnerIterator it(sf.A, j); it; ++it)
                trip.emplace_back(n + it.row(), j, it.value());
        for (int i = 0; i < m; ++i) trip.emplace_back(n + i, n + i, -rho);
        K.setFromTriplets(trip.begin(), trip.end());
        K.makeCompressed();
    }
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt;
    ldlt.compute(K);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("solver: KKT factorization failed");

    // Solve [[I, A'], [A, -rho I]] (p, q) = (xi, -eta) to apply
    // [[I, A'], [-A, rho I]]^{-1} to (xi, eta).
    VectorXd rhs(n + m), sol_nm(n + m);
    auto msolve = [&](const VectorXd& xi, const VectorXd& eta, VectorXd& px, VectorXd& py) {
        rhs.head(n) = xi;
        rhs.tail(m) = -eta;
        sol_nm = ldlt.solve(rhs);
        px = sol_nm.head(n);
        py = sol_nm.tail(m);
    };

    // g = M^{-1} (c, b), reused every iteration.
    VectorXd gx(n), gy(m);
    msolve(sf.c, sf.b, gx, gy);
    const double hg = 1.0 + sf.c.dot(gx) + sf.b.dot(gy);

    // State: (u_x, u_y, u_tau, v_y, v_kappa). The free block's v_x vanishes
    // after every step, so it is not stored.
    const int dim = n + 2 * m + 2;
    const int iTAU = n + m, iVY = n + m + 1, iKAP = dim - 1;
    VectorXd S = VectorXd::Zero(dim);
    S[iTAU] = 1.0;
    S[iKAP] = 1.0;

    VectorXd wx(n), wy(m), rx(n), ry(m);
    VectorXd tx(n), ty(m);
    VectorXd Snext(dim), f(dim);

    // One splitting step: out = T(s).
    auto apply_T = [&](const VectorXd& s, VectorXd& out) {
        // utilde = (P+Q)^{-1} P (u+v)
        wx = s.head(n);
        wy = rho * (s.segment(n, m) + s.segment(iVY, m));
        const double wtau = s[iTAU] + s[iKAP];
        msolve(wx, wy, rx, ry);
        const double ttau = (wtau + sf.c.dot(rx) + sf.b.dot(ry)) / hg;
        rx -= ttau * gx;
        ry -= ttau * gy;

        // over-relaxed point t = alpha*utilde + (1-alpha)*u
        const double a = opts.alpha;
        tx = a * rx + (1.0 - a) * s.head(n);
        ty = a * ry + (1.0 - a) * s.segment(n, m);
        const double ttau2 = a * ttau + (1.0 - a) * s[iTAU];

        // u = proj(t - v), v = v + u - t
        out.head(n) = tx;
        out.segment(n, m) = ty - s.segment(iVY, m);
        project_cone(sf.blocks, out.segment(n, m));
        out[iTAU] = std::max(0.0, ttau2 - s[iKAP]);
        out.segment(iVY, m) = s.segment(iVY, m) + out.segment(n, m) - ty;
        out[iKAP] = s[iKAP] + out[iTAU] - ttau2;
    };

    Solution best;
    double best_score = std::numeric_limits<double>::infinity();

    // Candidate extraction + unscaled residual check, always from a mapped
    // state (cone membership holds there).
    auto extract = [&](const VectorXd& st, Solution& out) -> bool {
        const double tau = st[iTAU];
        if (tau <= 1e-12) return false;
        // The slack lives on the metric-scaled side: s = rho v_y / tau.
        VectorXd x = st.head(n) / tau, y = st.segment(n, m) / tau,
                 s = rho * st.segment(iVY, m) / tau;
        if (opts.normalize) {
            x = x.cwiseProduct(sc.E) / sc.beta;
            y = y.cwiseProduct(sc.D) / sc.gamma;
            s = s.cwiseQuotient(sc.D) / sc.beta;
        }
        VectorXd pr = orig.A * x + s - orig.b;
        VectorXd dr = orig.A.transpose() * y + orig.c;
        const double pobj = orig.c.dot(x), dobj = -orig.b.dot(y);
        out.pres = pr.norm() / (1.0 + orig.b.norm());
        out.dres = dr.norm() / (1.0 + orig.c.norm());
        out.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
        out.primal_obj = pobj;
        out.dual_obj = dobj;
        out.x.assign(x.data(), x.data() + n);
        // Split y into per-constraint blocks; merged equality rows give the
        // positive part to the [1] row and the negative part to its twin.
        out.point.y.assign(prog.cons.size(), 0.0);
        out.point.z.resize(prog.cons.size());
        for (const auto& blk : sf.blocks) {
            const double yv = y[blk.offset];
            if (blk.zero) {
                out.point.y[blk.con] = yv > 0.0 ? yv : 0.0;
                out.point.y[blk.twin] = yv < 0.0 ? -yv : 0.0;
                continue;
            }
            out.point.y[blk.con] = yv;
            out.point.z[blk.con].assign(blk.dim - 1, 0.0);
            for (int r = 1; r < blk.dim; ++r) out.point.z[blk.con][r - 1] = y[blk.offset + r];
        }
        return true;
    };

    // Anderson acceleration on the fixed point map: ring buffer of iterate
    // and residual differences, ridge-regularized least squares, restart
    // from the best point when the residual blows up or the candidate
    // collapses toward the (scale-invariant) origin.
    const int mem = std::max(0, opts.aa_memory);
    Eigen::MatrixXd dS, dF;
    if (mem > 0) {
        dS.resize(dim, mem);
        dF.resize(dim, mem);
    }
    int m_used = 0, head = 0, cooldown = 0;
    VectorXd prev_S, prev_f, Scand;
    bool have_prev = false;
    double best_nf = std::numeric_limits<double>::infinity();
    VectorXd S_best_next;

    int it = 0;
    for (; it < opts.max_iters; ++it) {
        apply_T(S, Snext);
        f = Snext - S;
        const double nf = f.norm();

        if ((it + 1) % opts.check_every == 0) {
            Solution cand;
            if (extract(Snext, cand)) {
                const double score = std::max({cand.pres, cand.dres, cand.gap});
                if (score < best_score) {
                    best_score = score;
                    cand.iters = it + 1;
                    best = std::move(cand);
                }
                if (opts.verbose && (it + 1) % (opts.check_every * 40) == 0) {
                    std::fprintf(stderr, "  it %6d  pres %.2e dres %.2e gap %.2e obj %.9f\n",
                                 it + 1, best.pres, best.dres, best.gap, best.dual_obj);
                    if (opts.verbose >= 2) {
                        const double tau = Snext[iTAU];
                        VectorXd xs = Snext.head(n) / tau, ys = Snext.segment(n, m) / tau,
                                 ss = rho * Snext.segment(iVY, m) / tau;
                        const double sp = (sf.A * xs + ss - sf.b).norm();
                        const double sd = (sf.A.transpose() * ys + sf.c).norm();
                        std::fprintf(stderr, "           scaled pres %.2e dres %.2e tau %.3e\n",
                                     sp, sd, tau);
                    }
                }
                if (best_score <= opts.eps) {
                    best.status = SolveStatus::optimal;
                    return best;
                }
            } else {
                // tau collapsed: check for an infeasibility certificate.
                VectorXd y = Snext.segment(n, m), x = Snext.head(n);
                if (opts.normalize) {
                    y = y.cwiseProduct(sc.D) / sc.gamma;
                    x = x.cwiseProduct(sc.E) / sc.beta;
                }
                const double bty = orig.b.dot(y), ctx = orig.c.dot(x);
                if (bty < -1e-12 &&
                    (orig.A.transpose() * y).norm() <= -1e-6 * bty) {
                    best.status = SolveStatus::primal_infeasible;
                    best.iters = it + 1;
                    return best;
                }
                if (ctx < -1e-12) {
                    // Certificate needs Ax = -s for some s in K.
                    VectorXd s_dir = -(orig.A * x);
                    project_cone(sf.blocks, s_dir, false);
                    if ((orig.A * x + s_dir).norm() <= -1e-6 * ctx) {
                        best.status = SolveStatus::dual_infeasible;
                        best.iters = it + 1;
                        return best;
                    }
                }
            }
        }

        if (mem == 0) {
            S.swap(Snext);
            continue;
        }

        if (nf <= best_nf) {
            best_nf = nf;
            S_best_next = Snext;
        } else if (cooldown == 0 && m_used > 0 && nf > opts.aa_safeguard * best_nf) {
            // Extrapolation wandered off: restart one plain step past the
            // best point seen, rebuild the memory from plain dynamics.
            S = S_best_next;
            m_used = 0;
            head = 0;
            have_prev = false;
            cooldown = mem;
            continue;
        }

        if (have_prev) {
            dS.col(head) = S - prev_S;
            dF.col(head) = f - prev_f;
            head = (head + 1) % mem;
            if (m_used < mem) ++m_used;
        }
        prev_S = S;
        prev_f = f;
        have_prev = true;

        if (cooldown > 0) --cooldown;
        if (m_used == 0 || cooldown > 0) {
            S.swap(Snext);
            continue;
        }
        const auto Fm = dF.leftCols(m_used);
        Eigen::MatrixXd G = Fm.transpose() * Fm;
        G.diagonal().array() += 1e-12 * std::max(G.trace(), 1e-30);
        const VectorXd gamma = G.ldlt().solve(Fm.transpose() * f);
        Scand = S + f;
        Scand.noalias() -= dS.leftCols(m_used) * gamma;
        Scand.noalias() -= dF.leftCols(m_used) * gamma;
        // The map is positively homogeneous (fixed points come in rays), so
        // a candidate shrinking the state hard is heading for the origin.
        if (Scand.norm() < 0.1 * S.norm())
            S.swap(Snext);
        else
            S.swap(Scand);
    }
    if (best.x.empty()) {
        Solution last;
        if (extract(Snext, last)) best = std::move(last);
    }
    best.status = SolveStatus::max_iters;
    best.iters = it;
    return best;
}

PolishResult polish(const dual::DualProgram& d, const dual::DualPoint& pt,
                    const programs::ProgramInput& in, double target_margin, double theta) {
    if (!d.eliminated) throw std::logic_error("polish: eliminate first");
    const auto& prog = d.p();
    if (pt.y.size() != prog.cons.size())
        throw std::invalid_argument("polish: point size mismatch");

    PolishResult out;
    out.objective_before = dual::dual_objective(d, pt, in).value;
    dual::DualPoint q = pt;

    std::vector<char> is_pivot(prog.cons.size(), 0);
    for (int j = 0; j < prog.num_vars(); ++j) is_pivot[d.pivot_of_var[j]] = 1;

    // Free scalar multipliers: reject negatives, then floor.
    for (size_t i = 0; i < prog.cons.size(); ++i) {
        if (is_pivot[i] || prog.cons[i].is_cone()) continue;
        if (q.y[i] < 0.0)
            throw std::invalid_argument("polish: negative multiplier on " + prog.cons[i].name());
        if (q.y[i] < target_margin) q.y[i] = target_margin;
    }

    // Cone blocks: floor the bound multiplier and pull z strictly inside.
    for (size_t i = 0; i < prog.cons.size(); ++i) {
        if (!prog.cons[i].is_cone()) continue;
        if (q.y[i] < 0.0)
            throw std::invalid_argument("polish: negative cone multiplier on " + prog.cons[i].name());
        if (q.y[i] < target_margin) q.y[i] = target_margin;
        double nz = 0.0;
        for (double zv : q.z[i]) nz += zv * zv;
        nz = std::sqrt(nz);
        const double cap = (1.0 - theta) * q.y[i];
        if (nz > cap) {
            const double scale = cap / nz;
            for (double& zv : q.z[i]) zv *= scale;
        }
    }

    // Derived multipliers: push each to the target through its partner row.
    // Variable columns first (their partners only feed the omega column),
    // then the omega column itself.
    auto repair = [&](int var) {
        const double val = dual::derived_multiplier(d, q, var).value;
        if (val >= target_margin) return;
        const int partner = d.partner_of_var[var];
        if (partner < 0)
            throw std::runtime_error("polish: no repair row for variable " + std::to_string(var));
        // Partner coefficient on this column, opposite sign to the pivot's.
        double pcoef = 0.0;
        const auto& row = prog.cons[partner].bound;
        for (size_t t = 0; t < row.idx.size(); ++t)
            if (row.idx[t] == var) pcoef = row.val[t];
        const double piv = prog.cons[d.pivot_of_var[var]].bound.val[0];
        // d(derived)/d(y_partner) = -pcoef/piv > 0 by partner construction.
        const double rate = -pcoef / piv;
        q.y[partner] += (target_margin - val) / rate * (1.0 + 1e-12) ;
    };
    for (int j = 1; j < prog.num_vars(); ++j) repair(j);
    repair(0);

    double min_scalar = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < prog.cons.size(); ++i) {
        if (prog.cons[i].is_cone()) continue;
        if (is_pivot[i]) continue;
        min_scalar = std::min(min_scalar, q.y[i]);
    }
    for (int j = 0; j < prog.num_vars(); ++j)
        min_scalar = std::min(min_scalar, dual::derived_multiplier(d, q, j).value);

    out.min_scalar_margin = min_scalar;
    out.objective_after = dual::dual_objective(d, q, in).value;
    out.point = std::move(q);
    return out;
}

}  // namespace minoverlap::solver
