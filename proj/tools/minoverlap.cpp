// Command line front end.
//
// Exit codes: 0 success, 2 bad input, 3 solver did not converge,
// 4 verification failed, 5 bound escaped the known envelope, 6 covering
// check failed.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "minoverlap/pipeline.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kBadInput = 2;
constexpr int kSolverFail = 3;
constexpr int kVerifyFail = 4;
constexpr int kEnvelope = 5;
constexpr int kUncovered = 6;

using minoverlap::certify::Certificate;
using minoverlap::pipeline::Options;
using minoverlap::programs::ProgramInput;
using minoverlap::programs::ProgramKind;
namespace serialize = minoverlap::serialize;
namespace pipeline = minoverlap::pipeline;

void add_solver_flags(CLI::App* cmd, Options& opts) {
    cmd->add_option("--eps", opts.solve.eps, "solver residual target");
    cmd->add_option("--max-iters", opts.solve.max_iters, "solver iteration cap");
    cmd->add_option("--alpha", opts.solve.alpha, "over-relaxation parameter");
    cmd->add_option("--polish-target", opts.polish_target, "scalar margin floor after polish");
    cmd->add_option("--polish-theta", opts.polish_theta, "cone shrink factor");
    cmd->add_option("--aa-memory", opts.solve.aa_memory, "acceleration window, 0 disables");
    cmd->add_option("--rho", opts.solve.rho, "multiplier block metric weight");
    cmd->add_option("--verbose", opts.solve.verbose, "progress detail level");
}

void print_cert(const Certificate& c) {
    const auto& in = c.input;
    if (in.kind == ProgramKind::lp)
        std::printf("program       lp N=%d R=%d (%d vars)\n", in.N, in.R, in.N + 1);
    else
        std::printf("program       full N=%d T=%d R=%d h=[%g,%g] p=[%g,%g] q=[%g,%g]%s\n", in.N,
                    in.T, in.R, in.h1, in.h2, in.p1, in.p2, in.q1, in.q2,
                    in.sine8 ? " sine8" : "");
    std::printf("solver        %s after %d iters (pres %.2e dres %.2e gap %.2e)\n",
                c.meta.status.c_str(), c.meta.iters, c.meta.pres, c.meta.dres, c.meta.gap);
    std::printf("objective     %.17g  (rounding bound %.3e)\n", c.objective,
                c.objective_error_bound);
    std::printf("certified     %.17g  %s\n", c.certified,
                serialize::hex_double(c.certified).c_str());
    std::printf("verification  %s  rows=%d  min margin %.3e at %s\n", c.pass ? "PASS" : "FAIL",
                c.rows_checked, c.min_margin, c.min_margin_row.c_str());
    if (c.weak) std::printf("note          certified value sits below the trivial bound 1/4\n");
}

int finish_bound(const Certificate& cert, const std::string& out) {
    print_cert(cert);
    if (!out.empty()) {
        serialize::save_certificate(cert, out);
        std::printf("wrote         %s\n", out.c_str());
    }
    return cert.pass ? kOk : kVerifyFail;
}

std::vector<std::string> collect_cert_paths(const std::vector<std::string>& files,
                                            const std::string& dir) {
    std::vector<std::string> paths = files;
    if (!dir.empty()) {
        for (const auto& e : std::filesystem::directory_iterator(dir)) {
            const auto p = e.path().string();
            if (p.size() > 10 && p.substr(p.size() - 10) == ".cert.json") paths.push_back(p);
        }
    }
    std::sort(paths.begin(), paths.end());
    return paths;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"certified lower bounds for the minimum overlap constant"};
    app.require_subcommand(1);

    // lp
    auto* lp = app.add_subcommand("lp", "solve the averaged relaxation and certify it");
    int lp_n = 2000, lp_r = 20;
    std::string lp_out, lp_prog_out;
    Options lp_opts;
    lp->add_option("--n", lp_n, "number of cells")->required();
    lp->add_option("--r", lp_r, "number of cosine rows");
    lp->add_option("--out", lp_out, "certificate file to write");
    lp->add_option("--program-out", lp_prog_out, "dump the built program as JSON");
    add_solver_flags(lp, lp_opts);

    // bound
    auto* bound = app.add_subcommand("bound", "solve the full program and certify it");
    ProgramInput bin;
    bin.kind = ProgramKind::full;
    std::string bound_out, bound_prog_out;
    bool paper_compat = false;
    Options bound_opts;
    bound->add_option("--n", bin.N, "number of cells per half")->required();
    bound->add_option("--t", bin.T, "number of Fourier coefficients")->required();
    bound->add_option("--r", bin.R, "number of cosine cones / tail variables")->required();
    bound->add_option("--h1", bin.h1, "mean window, lower");
    bound->add_option("--h2", bin.h2, "mean window, upper");
    bound->add_option("--p1", bin.p1, "c_1 window, lower");
    bound->add_option("--p2", bin.p2, "c_1 window, upper");
    bound->add_option("--q1", bin.q1, "d_1 window, lower");
    bound->add_option("--q2", bin.q2, "d_1 window, upper");
    bound->add_flag("--paper-compat", paper_compat,
                    "couple sine rows with 8/(m pi) instead of 4/(m pi)");
    bound->add_option("--out", bound_out, "certificate file to write");
    bound->add_option("--program-out", bound_prog_out, "dump the built program as JSON");
    add_solver_flags(bound, bound_opts);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run every job in a plan file");
    std::string sweep_plan, sweep_outdir = "certs";
    int sweep_workers = 1;
    Options sweep_opts;
    sweep->add_option("--plan", sweep_plan, "plan JSON")->required();
    sweep->add_option("--outdir", sweep_outdir, "directory for certificates");
    sweep->add_option("--workers", sweep_workers, "parallel jobs");
    add_solver_flags(sweep, sweep_opts);

    // ellipses
    auto* ell = app.add_subcommand("ellipses",
                                   "assemble certificates into regions and check a covering");
    std::vector<std::string> ell_files;
    std::string ell_dir, ell_outdir;
    double ell_threshold = 0.0, ell_guard = 1e-7;
    minoverlap::certify::Box2 ell_box;
    ell->add_option("--cert", ell_files, "certificate file (repeatable)");
    ell->add_option("--certdir", ell_dir, "directory of *.cert.json files");
    ell->add_option("--threshold", ell_threshold, "claimed bound over the box")->required();
    ell->add_option("--h-lo", ell_box.h_lo, "box, mean lower")->required();
    ell->add_option("--h-hi", ell_box.h_hi, "box, mean upper")->required();
    ell->add_option("--p-lo", ell_box.p_lo, "box, c_1 lower")->required();
    ell->add_option("--p-hi", ell_box.p_hi, "box, c_1 upper")->required();
    ell->add_option("--guard", ell_guard, "slack every grid cell must keep");
    ell->add_option("--outdir", ell_outdir, "directory for regions.csv / regions.svg");

    // oracle
    auto* oracle = app.add_subcommand("oracle", "check a density fixture against a program");
    std::string ofix;
    ProgramInput oin;
    oin.kind = ProgramKind::full;
    bool o_lp = false, o_solve = false;
    double o_tol = 1e-9, o_gap = 1e-5;
    Options o_opts;
    oracle->add_option("--fixture", ofix, "step density file")->required();
    oracle->add_option("--n", oin.N, "number of cells per half")->required();
    oracle->add_option("--t", oin.T, "number of Fourier coefficients");
    oracle->add_option("--r", oin.R, "number of cosine cones / tail variables");
    oracle->add_option("--h1", oin.h1, "mean window, lower");
    oracle->add_option("--h2", oin.h2, "mean window, upper");
    oracle->add_option("--p1", oin.p1, "c_1 window, lower");
    oracle->add_option("--p2", oin.p2, "c_1 window, upper");
    oracle->add_option("--q1", oin.q1, "d_1 window, lower");
    oracle->add_option("--q2", oin.q2, "d_1 window, upper");
    oracle->add_flag("--lp", o_lp, "check the averaged relaxation instead");
    oracle->add_flag("--solve", o_solve, "also solve the program and compare optima");
    oracle->add_option("--tol", o_tol, "feasibility slack tolerance");
    oracle->add_option("--gap", o_gap, "allowed excess of optimum over the sup norm");
    add_solver_flags(oracle, o_opts);

    // verify
    auto* verify = app.add_subcommand("verify", "re-verify a stored certificate");
    std::string vcert;
    verify->add_option("--cert", vcert, "certificate file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kBadInput;
    }

    try {
        if (*lp) {
            if (!lp_prog_out.empty())
                serialize::save_program(minoverlap::programs::build_lp(lp_n, lp_r), lp_prog_out);
            return finish_bound(pipeline::run_lp(lp_n, lp_r, lp_opts), lp_out);
        }
        if (*bound) {
            bin.sine8 = paper_compat;
            if (!bound_prog_out.empty())
                serialize::save_program(minoverlap::programs::build_full(bin), bound_prog_out);
            return finish_bound(pipeline::run_bound(bin, bound_opts), bound_out);
        }
        if (*sweep) {
            const auto plan = serialize::load_plan(sweep_plan);
            const auto rep = pipeline::run_sweep(plan, sweep_opts, sweep_workers, sweep_outdir);
            for (const auto& r : rep.results) {
                if (!r.error.empty())
                    std::printf("%-16s ERROR %s\n", r.label.c_str(), r.error.c_str());
                else
                    std::printf("%-16s %s certified %.17g\n", r.label.c_str(),
                                r.pass ? "PASS" : "FAIL", r.certified);
            }
            std::printf("passed %d/%zu, min certified %.17g\n", rep.num_pass, rep.results.size(),
                        rep.min_certified);
            return rep.all_pass ? kOk : kVerifyFail;
        }
        if (*ell) {
            std::vector<Certificate> certs;
            for (const auto& p : collect_cert_paths(ell_files, ell_dir))
                certs.push_back(serialize::load_certificate(p));
            if (certs.empty()) throw std::invalid_argument("no certificates given");
            const auto rep =
                pipeline::run_ellipses(certs, ell_threshold, ell_box, ell_guard, ell_outdir);
            std::printf("%zu regions, grid %dx%d, delta %.3e, lipschitz %.3e\n",
                        rep.regions.size(), rep.cover.cells_h, rep.cover.cells_p, rep.cover.delta,
                        rep.cover.lipschitz);
            if (rep.cover.covered) {
                std::printf("COVERED: bound %.17g holds on h=[%g,%g] p=[%g,%g]\n", ell_threshold,
                            ell_box.h_lo, ell_box.h_hi, ell_box.p_lo, ell_box.p_hi);
                return kOk;
            }
            std::printf("NOT COVERED: %s (witness h=%.12g p=%.12g)\n", rep.cover.reason.c_str(),
                        rep.cover.witness_h, rep.cover.witness_p);
            return kUncovered;
        }
        if (*oracle) {
            oin.kind = o_lp ? ProgramKind::lp : ProgramKind::full;
            const auto f = minoverlap::piecewise::load_step_fixture(ofix);
            const auto rep = pipeline::run_oracle(f, oin, o_solve, o_opts);
            std::printf("sup norm      %.17g\n", rep.sup_norm);
            std::printf("max cell avg  %.17g\n", rep.omega);
            std::printf("mean          %.17g\n", rep.mean);
            std::printf("min residual  %.3e at %s\n", rep.min_residual, rep.argmin_row.c_str());
            bool ok = rep.min_residual >= -o_tol;
            if (o_solve) {
                std::printf("solver opt    %.17g (allowed %.17g)\n", rep.solver_objective,
                            rep.sup_norm + o_gap);
                ok = ok && rep.solved && rep.solver_objective <= rep.sup_norm + o_gap;
            }
            std::printf("%s\n", ok ? "FEASIBLE" : "INFEASIBLE");
            return ok ? kOk : kVerifyFail;
        }
        if (*verify) {
            const auto cert = serialize::load_certificate(vcert);
            const auto rep = pipeline::run_verify(cert);
            std::printf("rows          %d checked, %d failed\n", rep.detail.rows_checked,
                        rep.detail.rows_failed);
            std::printf("certified     %.17g (stored %.17g, %s)\n", rep.certified,
                        rep.stored_certified, rep.matches_stored ? "match" : "MISMATCH");
            std::printf("verification  %s\n", rep.pass ? "PASS" : "FAIL");
            if (!rep.pass) {
                for (const auto& row : rep.detail.failed_rows)
                    std::printf("failed row    %s\n", row.c_str());
                return kVerifyFail;
            }
            if (!rep.envelope_ok) {
                std::printf("certified value escapes the known envelope\n");
                return kEnvelope;
            }
            if (!rep.matches_stored) return kVerifyFail;
            return kOk;
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kBadInput;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kBadInput;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kSolverFail;
    } catch (const std::logic_error& e) {
        // Remaining logic errors are the envelope tripwire.
        std::fprintf(stderr, "error: %s\n", e.what());
        return kEnvelope;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kBadInput;
    }
    return kBadInput;
}
