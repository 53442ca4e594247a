#pragma once

// First-order conic solver: operator splitting on the homogeneous self-dual
// embedding. One sparse LDLT factorization of the quasidefinite KKT matrix
// up front, two triangular solves per iteration, cone projections, fixed
// over-relaxation. Fully deterministic for a given program and options.

#include <string>
#include <vector>

#include "minoverlap/dual.hpp"
#include "minoverlap/program.hpp"

namespace minoverlap::solver {

struct SolveOptions {
    double eps = 1e-9;        // relative primal/dual residual and gap target
    int max_iters = 100000;
    double alpha = 1.5;       // over-relaxation
    int check_every = 25;
    bool normalize = true;
    double rho = 1.0;         // metric weight of the multiplier block; larger
                              // pushes dual residuals down faster
    int aa_memory = 10;       // Anderson acceleration window, 0 disables
    double aa_safeguard = 5.0;  // restart when the residual grows past this
    int verbose = 0;          // 0 quiet, 1 progress lines
};

enum class SolveStatus { optimal, max_iters, primal_infeasible, dual_infeasible };

const char* status_name(SolveStatus s);

struct Solution {
    SolveStatus status = SolveStatus::max_iters;
    std::vector<double> x;    // primal point
    dual::DualPoint point;    // dual multipliers per constraint
    double primal_obj = 0.0;
    double dual_obj = 0.0;
    double pres = 0.0, dres = 0.0, gap = 0.0;
    int iters = 0;
};

Solution solve(const programs::ConicProgram& prog, const SolveOptions& opts = {});

// Push an approximately optimal dual point strictly inside every inequality:
// floors free multipliers at `target_margin`, shrinks cone blocks by `theta`,
// and repairs derived multipliers through their partner rows. Throws when a
// free multiplier is negative or no partner exists for a deficient variable.
struct PolishResult {
    dual::DualPoint point;
    double objective_before = 0.0;
    double objective_after = 0.0;
    double min_scalar_margin = 0.0;  // min over free + derived multipliers
};
PolishResult polish(const dual::DualProgram& d, const dual::DualPoint& pt,
                    const programs::ProgramInput& in, double target_margin = 1e-12,
                    double theta = 1e-6);

// Dual refinement by partial maximization: keeps the dense-row multipliers
// as coordinates, closes every variable column exactly through its
// pivot/partner pair (minimal complementary choice, cone blocks fixed), and
// improves the coordinates by cyclic exact line searches on the concave
// piecewise linear closed objective. The result is exactly dual feasible up
// to rounding for any coordinate values, so refinement can only change
// quality, never soundness. Throws std::invalid_argument when the program
// lacks the required pivot/partner shape.
dual::DualPoint refine_support(const dual::DualProgram& d, const Solution& sol,
                               int max_sweeps = 12);

}  // namespace minoverlap::solver
