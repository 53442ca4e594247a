#include "minoverlap/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <thread>

#include "minoverlap/dual.hpp"
#include "minoverlap/oracle.hpp"

namespace minoverlap::pipeline {

using programs::ConicProgram;
using programs::ProgramInput;
using programs::ProgramKind;

namespace {

std::shared_ptr<const ConicProgram> build(const ProgramInput& in) {
    in.validate();
    return std::make_shared<const ConicProgram>(
        in.kind == ProgramKind::lp ? programs::build_lp(in.N, in.R) : programs::build_full(in));
}

}  // namespace

certify::Certificate run_bound(const ProgramInput& in, const Options& opts) {
    auto prog = build(in);
    auto d = dual::dualize(prog);
    dual::eliminate(d);

    auto sol = solver::solve(*prog, opts.solve);
    if (sol.status == solver::SolveStatus::primal_infeasible ||
        sol.status == solver::SolveStatus::dual_infeasible)
        throw std::runtime_error(std::string("solver failed: ") + solver::status_name(sol.status));

    // Candidate points: the solver's dual point plus supported-set
    // refinements over a tolerance ladder. Verification picks the best; a
    // wrong activity guess only costs quality, never soundness.
    struct Cand {
        dual::DualPoint point;
        certify::VerificationReport report;
    };
    std::optional<Cand> best;
    std::string first_error;
    auto consider = [&](const dual::DualPoint& pt) {
        try {
            auto pol = solver::polish(d, pt, in, opts.polish_target, opts.polish_theta);
            auto rep = certify::verify(d, pol.point, in);
            bool better = !best || (rep.pass && !best->report.pass) ||
                          (rep.pass == best->report.pass && rep.certified > best->report.certified);
            if (better) best = Cand{std::move(pol.point), std::move(rep)};
        } catch (const std::exception& e) {
            if (first_error.empty()) first_error = e.what();
        }
    };
    consider(sol.point);
    if (opts.refine) {
        try {
            consider(solver::refine_support(d, sol));
        } catch (const std::invalid_argument&) {
            // program shape outside what the refiner handles
        }
    }
    if (!best) throw std::runtime_error("no usable dual point: " + first_error);

    certify::SolverMeta meta;
    meta.status = solver::status_name(sol.status);
    meta.eps = opts.solve.eps;
    meta.iters = sol.iters;
    meta.max_iters = opts.solve.max_iters;
    meta.alpha = opts.solve.alpha;
    meta.polish_target = opts.polish_target;
    meta.polish_theta = opts.polish_theta;
    meta.pres = sol.pres;
    meta.dres = sol.dres;
    meta.gap = sol.gap;

    auto cert = certify::make_certificate(d, best->point, in, best->report, meta);
    if (cert.pass) certify::enforce_envelope(cert.certified);
    return cert;
}

certify::Certificate run_lp(int N, int R, const Options& opts) {
    ProgramInput in;
    in.kind = ProgramKind::lp;
    in.N = N;
    in.R = R;
    return run_bound(in, opts);
}

SweepReport run_sweep(const serialize::SweepPlan& plan, const Options& opts, int workers,
                      const std::string& outdir) {
    if (!outdir.empty()) std::filesystem::create_directories(outdir);
    SweepReport rep;
    rep.results.resize(plan.jobs.size());

    auto run_job = [&](size_t i) {
        auto& res = rep.results[i];
        res.input = plan.jobs[i].input;
        res.label = plan.jobs[i].label;
        if (res.label.empty()) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "job_%03zu", i);
            res.label = buf;
        }
        try {
            auto cert = run_bound(plan.jobs[i].input, opts);
            res.pass = cert.pass;
            res.certified = cert.certified;
            if (!outdir.empty()) {
                res.path = outdir + "/" + res.label + ".cert.json";
                serialize::save_certificate(cert, res.path);
            }
        } catch (const std::exception& e) {
            res.error = e.what();
        }
    };

    const int nw = std::max(1, std::min<int>(workers, int(plan.jobs.size())));
    if (nw <= 1) {
        for (size_t i = 0; i < plan.jobs.size(); ++i) run_job(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(nw);
        for (int t = 0; t < nw; ++t)
            pool.emplace_back([&] {
                for (size_t i = next++; i < plan.jobs.size(); i = next++) run_job(i);
            });
        for (auto& th : pool) th.join();
    }

    bool any = false;
    rep.all_pass = !plan.jobs.empty();
    for (const auto& res : rep.results) {
        if (res.pass) {
            ++rep.num_pass;
            if (!any || res.certified < rep.min_certified) rep.min_certified = res.certified;
            any = true;
        } else {
            rep.all_pass = false;
        }
    }
    return rep;
}

EllipseReport run_ellipses(const std::vector<certify::Certificate>& certs, double threshold,
                           const certify::Box2& box, double guard, const std::string& outdir) {
    EllipseReport rep;
    for (const auto& cert : certs)
        if (cert.pass) rep.regions.push_back(certify::ellipse(cert, threshold));
    rep.cover = certify::covers(rep.regions, box, guard);
    rep.csv = serialize::regions_to_csv(rep.regions);
    rep.svg = serialize::regions_to_svg(rep.regions, box);
    if (!outdir.empty()) {
        std::filesystem::create_directories(outdir);
        serialize::write_file(outdir + "/regions.csv", rep.csv);
        serialize::write_file(outdir + "/regions.svg", rep.svg);
    }
    return rep;
}

OracleReport run_oracle(const piecewise::PiecewiseFn& f, const ProgramInput& in,
                        bool solve_program, const Options& opts) {
    in.validate();
    OracleReport rep;
    const auto M = piecewise::overlap_with_complement(f);
    rep.sup_norm = M.sup_norm();

    auto prog = build(in);
    std::vector<double> x;
    if (in.kind == ProgramKind::full) {
        const auto asg = oracle::assignment(f, in);
        rep.omega = asg.omega;
        rep.mean = asg.mean;
        x = oracle::to_primal(asg, prog->layout);
    } else {
        // The averaged relaxation sees the symmetrized overlap, one cell set
        // covering both halves.
        const auto avg = oracle::averages(M, in.N);
        x.assign(prog->num_vars(), 0.0);
        for (int j = 1; j <= in.N; ++j) {
            x[prog->layout.w(j)] = 0.5 * (avg.w[j - 1] + avg.v[j - 1]);
            rep.omega = std::max(rep.omega, x[prog->layout.w(j)]);
        }
        x[prog->layout.omega()] = rep.omega;
        rep.mean = M.mean();
    }
    rep.min_residual = programs::min_residual(*prog, x, &rep.argmin_row);

    if (solve_program) {
        auto sol = solver::solve(*prog, opts.solve);
        rep.solved = sol.status == solver::SolveStatus::optimal;
        rep.solver_objective = sol.primal_obj;
    }
    return rep;
}

VerifyReport run_verify(const certify::Certificate& cert) {
    auto prog = build(cert.input);
    auto d = dual::dualize(prog);
    dual::eliminate(d);
    VerifyReport rep;
    rep.detail = certify::verify(d, cert.point, cert.input);
    rep.pass = rep.detail.pass;
    rep.certified = rep.detail.certified;
    rep.stored_certified = cert.certified;
    rep.matches_stored = rep.detail.certified == cert.certified;
    rep.envelope_ok = true;
    if (rep.pass) {
        try {
            certify::enforce_envelope(rep.certified);
        } catch (const std::logic_error&) {
            rep.envelope_ok = false;
        }
    }
    return rep;
}

}  // namespace minoverlap::pipeline
