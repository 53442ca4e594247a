#pragma once

// Conic programs whose optimum lower-bounds the minimum overlap constant.
//
// Variables (full program), 0-based column indices:
//   X_0            Omega (objective)
//   X_j            w_j, j = 1..N      (right-side cell averages of M)
//   X_{N+j}        v_j, j = 1..N      (left-side cell averages)
//   X_{2N+k}       c_k, k = 1..T      (cosine coefficients of f)
//   X_{2N+T+k}     d_k, k = 1..T      (sine coefficients)
//   X_{2N+2T+i}    eps_{2i-1}, i = 1..R   (cosine tail remainders)
//   X_{2N+2T+R+i}  delta_{2i-1}, i = 1..R (sine tail remainders)
// The LP variant keeps only Omega and w.
//
// Every constraint is either a scalar inequality bound(x) >= 0 or a second
// order cone ||norm(x)|| <= bound(x), with affine rows stored sparsely.

#include <cstdint>
#include <string>
#include <vector>

namespace minoverlap::programs {

struct AffineRow {
    std::vector<int32_t> idx;
    std::vector<double> val;
    double offset = 0.0;

    void add(int32_t i, double v) {
        if (v != 0.0) { idx.push_back(i); val.push_back(v); }
    }
    double eval(const double* x) const {
        double s = offset;
        for (size_t t = 0; t < idx.size(); ++t) s += val[t] * x[idx[t]];
        return s;
    }
};

enum class Family : uint8_t {
    obnd,        // 1 - Omega >= 0
    wbnd_1,      // Omega - w_j >= 0
    wbnd_2,      // w_j >= 0                    (pivot for w_j)
    vbnd_1,      // Omega - v_j >= 0
    vbnd_2,      // v_j >= 0                    (pivot for v_j)
    sum,         // mass equality as two inequalities
    mean,        // mean lower bound
    mome,        // second moment upper bound
    coscone,     // cosine constraint as a second order cone
    sin_1,       // sine bracket, lower
    sin_2,       // sine bracket, upper
    ckbnd_1,     // c_k + 2/pi >= 0
    ckbnd_2,     // 2/pi - c_k >= 0             (pivot for c_k)
    dkbnd_1,
    dkbnd_2,     //                             (pivot for d_k)
    ep_1,        // eps + tailbound >= 0
    ep_2,        // tailbound - eps >= 0        (pivot for eps)
    del_1,
    del_2,       //                             (pivot for delta)
    par,         // Parseval cone ||(c,d)|| <= 1/sqrt(2)
    c1bnd,       // p1 <= c_1 <= p2 (two rows)
    d1bnd,       // q1 <= d_1 <= q2
    cosup,       // A_2 lower envelope row
    lp_mass,     // LP mass equality as two inequalities
    lp_cos,      // LP cosine rows
    lp_mom,      // LP second moment row
};

const char* family_name(Family f);
Family family_from_name(const std::string& name);

// How the constant term depends on the box parameters; drives objective
// sensitivity analysis (certificate reuse) and input-substituted evaluation.
enum class DepTag : uint8_t { fixed, mean_h1, mome_h2, c1_lo, c1_hi, d1_lo, d1_hi, cos_up };

struct Constraint {
    Family family;
    int32_t i0 = 0;              // primary index within the family (j, k, i or m)
    AffineRow bound;             // scalar row, or cone bound row
    std::vector<AffineRow> norm; // empty for scalar constraints
    DepTag dep = DepTag::fixed;
    bool pivot = false;          // designated elimination row (single nonzero)

    bool is_cone() const { return !norm.empty(); }
    std::string name() const;
};

enum class ProgramKind : uint8_t { lp, full };

struct ProgramInput {
    ProgramKind kind = ProgramKind::full;
    int N = 0, T = 0, R = 0;
    double h1 = 0, h2 = 0;   // mean window
    double p1 = 0, p2 = 0;   // c_1 window
    double q1 = 0, q2 = 0;   // d_1 window
    // Compatibility switch (--paper-compat): sine rows couple b_m with
    // coefficient 8/(m pi) instead of the default 4/(m pi).
    bool sine8 = false;

    double L() const { return 2.0 / N; }
    void validate() const;
};

struct VarLayout {
    int N = 0, T = 0, R = 0;
    bool lp = false;

    int omega() const { return 0; }
    int w(int j) const { return j; }
    int v(int j) const { return N + j; }
    int c(int k) const { return 2 * N + k; }
    int d(int k) const { return 2 * N + T + k; }
    int eps(int i) const { return 2 * N + 2 * T + i; }
    int del(int i) const { return 2 * N + 2 * T + R + i; }
    int count() const { return lp ? N + 1 : 2 * N + 2 * T + 2 * R + 1; }
};

// Affine pieces of the cosine cone at frequency index m, kept for diagnostic
// evaluation of the underlying quadratic inequality.
struct CosConeMeta {
    int m = 0;
    double s = 0.0;       // sin(m pi/2) / (m pi)
    AffineRow a_expr;     // a_m as a function of x (includes constant s for odd m)
    AffineRow b_expr;     // b_m
    AffineRow f_lo;       // lower envelope sum bounding A_m from below
};

struct ConicProgram {
    ProgramInput input;
    VarLayout layout;
    AffineRow objective;  // minimize objective.eval(x)
    std::vector<Constraint> cons;
    std::vector<CosConeMeta> cone_meta;

    int num_vars() const { return layout.count(); }
    int find(Family f, int i0) const;  // -1 when absent
};

// Averaged relaxation: variables (Omega, w), mass row, optional cosine rows
// for even frequencies 2m (m = 1..R) and the second moment cap. With R = 0
// only the boxes and the mass rows remain and the optimum is exactly 1/4.
ConicProgram build_lp(int N, int R);

// Full program over (Omega, w, v, c, d, eps, delta) with the cosine cones,
// sine brackets, tail boxes, Parseval cone, and first-coefficient windows.
ConicProgram build_full(const ProgramInput& in);

// Scalar rows: value of bound(x). Cones: bound(x) - ||norm(x)||_2.
std::vector<double> quadratic_residuals(const ConicProgram& prog, const std::vector<double>& x);
double min_residual(const ConicProgram& prog, const std::vector<double>& x, std::string* argmin = nullptr);

// Quadratic form behind cone m: 4 s a(x) - 2(a(x)^2 + b(x)^2) - f_lo(x),
// nonnegative exactly when the cone residual is (up to rounding).
double cos_quadratic_residual(const ConicProgram& prog, int cone_index, const std::vector<double>& x);

}  // namespace minoverlap::programs
