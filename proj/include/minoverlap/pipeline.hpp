#pragma once

// End-to-end flows behind the command line: solve and certify one program,
// run a plan of programs, assemble certificates into covering regions, and
// replay stored certificates.

#include <string>
#include <vector>

#include "minoverlap/certify.hpp"
#include "minoverlap/piecewise.hpp"
#include "minoverlap/serialize.hpp"
#include "minoverlap/solver.hpp"

namespace minoverlap::pipeline {

struct Options {
    solver::SolveOptions solve;
    double polish_target = 1e-12;
    double polish_theta = 1e-6;
    // Supported-set refinement of the solver point before verification;
    // recovers high-accuracy multipliers from a moderately converged run.
    bool refine = true;
};

// Build, solve, polish, verify, and envelope-check one program. Throws
// std::runtime_error when the solver does not converge and std::logic_error
// when a verified bound escapes the known envelope; verification failures
// come back as a certificate with pass = false.
certify::Certificate run_bound(const programs::ProgramInput& in, const Options& opts = {});

// Averaged relaxation shortcut.
certify::Certificate run_lp(int N, int R, const Options& opts = {});

struct SweepJobResult {
    std::string label;
    programs::ProgramInput input;
    bool pass = false;
    double certified = 0.0;
    std::string path;   // certificate file, when outdir was given
    std::string error;  // nonempty when the job threw
};

struct SweepReport {
    std::vector<SweepJobResult> results;
    int num_pass = 0;
    double min_certified = 0.0;  // over passing jobs
    bool all_pass = false;
};

// Runs every job in plan order; workers > 1 solves jobs on a small thread
// pool (results stay ordered and bitwise independent of the worker count).
// Certificates are written under `outdir` when nonempty.
SweepReport run_sweep(const serialize::SweepPlan& plan, const Options& opts, int workers,
                      const std::string& outdir);

struct EllipseReport {
    std::vector<certify::EllipseRegion> regions;  // from passing certificates
    certify::CoverResult cover;
    std::string csv;
    std::string svg;
};

// Threshold regions of the given certificates plus a covering check of
// `box`. Writes regions.csv / regions.svg under `outdir` when nonempty.
EllipseReport run_ellipses(const std::vector<certify::Certificate>& certs, double threshold,
                           const certify::Box2& box, double guard, const std::string& outdir);

struct OracleReport {
    double min_residual = 0.0;  // worst slack of the reference assignment
    std::string argmin_row;
    double sup_norm = 0.0;      // max of the overlap M
    double omega = 0.0;         // max cell average (never above sup_norm)
    double mean = 0.0;
    bool solved = false;
    double solver_objective = 0.0;
};

// Feasibility of the reference assignment for f inside the program built
// from `in`; optionally solves the program, whose optimum can exceed the
// assignment's sup norm only by solver tolerance.
OracleReport run_oracle(const piecewise::PiecewiseFn& f, const programs::ProgramInput& in,
                        bool solve_program, const Options& opts = {});

struct VerifyReport {
    bool pass = false;
    double certified = 0.0;
    double stored_certified = 0.0;
    bool matches_stored = false;  // bitwise equality with the stored value
    bool envelope_ok = false;
    certify::VerificationReport detail;
};

// Re-verify a stored certificate from its point alone.
VerifyReport run_verify(const certify::Certificate& cert);

}  // namespace minoverlap::pipeline
