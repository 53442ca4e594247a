#pragma once

// Half-period Fourier data for densities on [-1,1] and the induced
// coefficients of the overlap function on [-2,2].
//
// Conventions: for a density f on [-1,1] with integral 1 let
//   c_k = integral cos(pi k x) f(x) dx,  d_k = integral sin(pi k x) f(x) dx.
// The overlap M = f * (1 - f(-.)) lives on [-2,2]; its cosine/sine
// coefficients at frequency m pi/2 are A_m, B_m below. a_m, b_m are the
// half-frequency coefficients of f itself, reconstructed from (c, d) plus a
// truncation remainder (eps_m, delta_m) once the series is cut at T terms.

#include <vector>

namespace minoverlap::fourier {

// sin(m*pi/2) for integer m: exactly 0, 1, or -1.
int sine_factor(int m);

// Truncated coefficient vectors c_1..c_T, d_1..d_T (index 0 unused inputs are
// passed 1-based through std::vector sized T).
struct Truncation {
    int T = 0;
    std::vector<double> c;  // c[k-1] = c_k
    std::vector<double> d;  // d[k-1] = d_k
};

// a_m = (1/2) integral cos(pi m x / 2) f(x) dx, expressed through (c, eps).
// Even m: c_{m/2}/2 (requires m/2 <= T). Odd m: eps_m plus the closed sum.
double a_coeff(int m, const Truncation& ft, double eps_m);

// b_m = (1/2) integral sin(pi m x / 2) f(x) dx, expressed through (d, delta).
double b_coeff(int m, const Truncation& ft, double delta_m);

// Overlap coefficients from (a_m, b_m).
double A_coeff(int m, double a_m, double b_m);
double B_coeff(int m, double b_m);

// Worst-case bound on the truncation remainder eps_m (cosine side) over all
// coefficient tails with sum of squares <= 1/2. Requires odd m, 1 <= m < 2T.
// Rounded outward so the returned double dominates the exact supremum.
double tail_bound_cos(int m, int T);

// Same for the sine-side remainder delta_m.
double tail_bound_sin(int m, int T);

// Second-moment identity: integral x^2 M(x) dx = 2/3 + mean^2 / 2 where
// mean = integral x M(x) dx.
double second_moment_rhs(double mean);

}  // namespace minoverlap::fourier
