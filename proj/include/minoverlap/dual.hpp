#pragma once

// Lagrangian dual of a conic program in the solver's standard form, with
// the equality system eliminated through designated pivot rows.
//
// Primal: minimize phi'x subject to scalar rows bound_i(x) >= 0 and cones
// ||norm_i(x)|| <= bound_i(x). Writing bound_i(x) = c_i'x + d_i and
// norm_i(x) = A_i x + b_i, the dual is
//   maximize  -sum_i (b_i' z_i + d_i y_i)
//   s.t.      sum_i (A_i' z_i + c_i y_i) = phi,   y_i >= 0,  ||z_i|| <= y_i.
// Every variable has a designated single-nonzero scalar row (its pivot);
// the matching multiplier is solved out of the equality system, leaving
// only sign and cone conditions on the remaining free multipliers.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "minoverlap/program.hpp"

namespace minoverlap::dual {

struct DualPoint {
    // y[i]: scalar multiplier of constraint i (for pivot rows this slot is
    // derived data, kept in sync for convenience). z[i]: cone block.
    std::vector<double> y;
    std::vector<std::vector<double>> z;
};

struct ColumnTerm {
    int32_t con;   // constraint index
    int32_t row;   // -1 = scalar/bound row, otherwise norm row index
    double coef;
};

struct DualProgram {
    std::shared_ptr<const programs::ConicProgram> prog;
    bool eliminated = false;
    std::vector<int32_t> pivot_of_var;    // constraint index per variable
    std::vector<int32_t> partner_of_var;  // repair row per variable (-1 if none)
    // Per-variable contributions of non-pivot constraints, in constraint
    // order; the fixed evaluation order of derived multipliers.
    std::vector<std::vector<ColumnTerm>> columns;

    const programs::ConicProgram& p() const { return *prog; }
};

DualProgram dualize(const programs::ConicProgram& prog);
DualProgram dualize(std::shared_ptr<const programs::ConicProgram> prog);

// Chooses pivots (builder-designated rows first, then any single-nonzero
// scalar row), builds the column structure and repair partners. Throws when
// some variable has no admissible pivot row.
void eliminate(DualProgram& d);

DualPoint zero_point(const DualProgram& d);

// Value of the eliminated multiplier for `var`, with the bookkeeping needed
// for a worst-case rounding bound: number of accumulated products and the
// sum of their magnitudes.
struct Accumulated {
    double value = 0.0;
    double abs_sum = 0.0;
    int terms = 0;
};
Accumulated derived_multiplier(const DualProgram& d, const DualPoint& pt, int var);

// Dual objective with the box parameters of `in` substituted into the
// parameter-dependent constant terms. Derived multipliers are folded in.
Accumulated dual_objective(const DualProgram& d, const DualPoint& pt,
                           const programs::ProgramInput& in);

// Constant term of constraint `c` under substituted inputs.
double bound_offset(const programs::Constraint& c, const programs::ProgramInput& in);

struct RowEval {
    int32_t con = 0;
    bool cone = false;
    bool derived = false;
    double margin = 0.0;    // scalar rows: multiplier value; cones: y^2 - |z|^2
    double abs_sum = 0.0;   // magnitude sum behind `margin`
    int terms = 0;          // accumulated products incl. constants
};

struct Evaluation {
    Accumulated objective;
    std::vector<RowEval> rows;  // one per constraint
};

// Margins never read the substituted constants, only the objective does.
Evaluation eval(const DualProgram& d, const DualPoint& pt, const programs::ProgramInput& in);

// Expand to the pre-elimination equality system and report the worst
// violation |sum_i (A_i'z_i + c_i y_i) - phi|_inf using derived values.
double equality_residual(const DualProgram& d, const DualPoint& pt);

}  // namespace minoverlap::dual
