#pragma once

// Rigorous acceptance of dual points. A stored point certifies a bound only
// if every inequality holds by more than a worst-case rounding bound for
// the exact expression evaluated in binary64, and the objective is reported
// minus its own rounding bound.

#include <string>
#include <vector>

#include "minoverlap/dual.hpp"
#include "minoverlap/program.hpp"

namespace minoverlap::certify {

double unit_roundoff();  // 2^-53

// Worst-case absolute error of a left-to-right sum of n terms whose
// magnitudes add to abs_sum: ((n-1) u (1+u) / (1 - (n-1) u)) * abs_sum,
// rounded outward. Callers evaluating dot products pass n = terms + 1 so the
// per-term product roundings are covered as well.
double fl_error_bound(int n, double abs_sum);

struct RowCheck {
    std::string name;
    double margin = 0.0;
    double error_bound = 0.0;
    int terms = 0;
    double abs_sum = 0.0;
    bool pass = false;
};

struct VerificationReport {
    bool pass = false;
    double objective = 0.0;
    double objective_error_bound = 0.0;
    double certified = 0.0;  // objective - bound, rounded down
    int rows_checked = 0;
    int rows_failed = 0;
    double min_margin = 0.0;
    std::string min_margin_row;
    // Tightest row among those with a nonzero error bound: the first place
    // the certificate would break under perturbation.
    double worst_ratio = 0.0;
    std::string worst_ratio_row;
    int worst_ratio_index = -1;
    std::vector<RowCheck> rows;
    std::vector<std::string> failed_rows;
};

// Checks every free multiplier (> 0), derived multiplier (> rounding bound)
// and cone block (y > 0 and y^2 - |z|^2 > rounding bound). Failures are
// data, not errors.
VerificationReport verify(const dual::DualProgram& d, const dual::DualPoint& pt,
                          const programs::ProgramInput& in);

// Multipliers of the parameter-coupled rows, stored in the row scaling in
// which the sensitivity formula below has leading factor N/4 (rows scaled
// by N/2 relative to the builder's): mean and mome carry 2/N, cosup 1/N,
// c1 rows carry 1.
struct NamedMultipliers {
    double mean = 0.0, mome = 0.0, cosup = 0.0;
    double c1_lo = 0.0, c1_hi = 0.0;
};

struct SolverMeta {
    std::string status;
    double eps = 0.0;
    int iters = 0;
    int max_iters = 0;
    double alpha = 0.0;
    double polish_target = 0.0;
    double polish_theta = 0.0;
    double pres = 0.0, dres = 0.0, gap = 0.0;
};

struct Certificate {
    programs::ProgramInput input;
    dual::DualPoint point;
    double objective = 0.0;
    double objective_error_bound = 0.0;
    double certified = 0.0;
    bool pass = false;
    bool weak = false;  // certified below the trivial mass bound 1/4
    NamedMultipliers named;
    SolverMeta meta;
    // Verification summary (rows omitted).
    int rows_checked = 0;
    double min_margin = 0.0;
    std::string min_margin_row;
    double worst_ratio = 0.0;
    std::string worst_ratio_row;
};

Certificate make_certificate(const dual::DualProgram& d, const dual::DualPoint& pt,
                             const programs::ProgramInput& in,
                             const VerificationReport& report, const SolverMeta& meta);

// Valid lower bound on the program objective at moved box parameters
// (h1', h2', p1', p2'), from the certificate's fixed dual point. The q
// window must stay fixed. Result is rounded down by its own error bound.
double reuse_objective(const Certificate& cert, double h1, double h2, double p1, double p2);

// Region of (h, p) where reuse_objective(cert, h, h, p, p) >= threshold:
//   G(h, p) = K + ch h + cp p - qh h^2 - qp p^2 >= 0,  qh, qp >= 0.
struct EllipseRegion {
    double K = 0.0, ch = 0.0, cp = 0.0, qh = 0.0, qp = 0.0;
    double anchor_h = 0.0, anchor_p = 0.0;  // (h1, p2) of the source input
    double threshold = 0.0;
    // Shape classification for reporting.
    enum class Kind { empty, ellipse, parabolic, halfplane, whole_plane } kind = Kind::empty;
    double center_h = 0.0, center_p = 0.0;  // ellipse only
    double semi_h = 0.0, semi_p = 0.0;

    double value(double h, double p) const {
        return K + ch * h + cp * p - qh * h * h - qp * p * p;
    }
};

EllipseRegion ellipse(const Certificate& cert, double threshold);

struct Box2 {
    double h_lo = 0.0, h_hi = 0.0, p_lo = 0.0, p_hi = 0.0;
};

struct CoverResult {
    bool covered = false;
    std::string reason;      // when not covered
    double witness_h = 0.0;  // a point no region covers with the guard
    double witness_p = 0.0;
    int cells_h = 0, cells_p = 0;
    double delta = 0.0;      // grid spacing used
    double lipschitz = 0.0;
};

// Conservative grid check: every cell must have its four corners and center
// inside one common region with slack >= guard, and guard must dominate
// lipschitz * delta. Deterministic; grid capped at 2048 cells per axis.
CoverResult covers(const std::vector<EllipseRegion>& regions, const Box2& box, double guard);

// Known-bounds envelope applied to every produced bound. The ceiling is the
// best published upper bound for the constant; crossing it means the
// construction is wrong. The floor sits one solver-gap allowance below the
// trivial mass bound 1/4.
inline constexpr double kUpperEnvelope = 0.3809268534330870;
inline constexpr double kLowerEnvelope = 0.24;
void enforce_envelope(double certified);

}  // namespace minoverlap::certify
