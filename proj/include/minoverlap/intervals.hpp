#pragma once

// Cell-average discretization of the overlap function and the trigonometric
// envelopes that bracket its Fourier sums.
//
// The overlap M on [-2,2] is summarized by N cell averages on each side:
//   w_j = (1/L) integral of M over [(j-1)L, jL],   L = 2/N,
//   v_j = (1/L) integral of M over [-jL, -(j-1)L],             j = 1..N.
// cos/sin evaluated at frequency m pi/2 vary by at most (pi m L / 4) around
// the cell midpoint value, which gives per-cell envelopes alpha/beta and
// two-sided brackets for A_m, B_m, the mean, and the second moment.

#include <utility>
#include <vector>

namespace minoverlap::intervals {

struct Discretization {
    int N = 0;
    double L = 0.0;  // always 2.0 / N
    explicit Discretization(int n);
};

struct Envelopes {
    int N = 0;
    int max_m = 0;  // envelopes stored for m = 1..max_m
    double L = 0.0;
    // Row-major [m-1][j-1].
    std::vector<double> alpha_lo, alpha_hi, beta_lo, beta_hi;

    double alo(int m, int j) const { return alpha_lo[size_t(m - 1) * N + (j - 1)]; }
    double ahi(int m, int j) const { return alpha_hi[size_t(m - 1) * N + (j - 1)]; }
    double blo(int m, int j) const { return beta_lo[size_t(m - 1) * N + (j - 1)]; }
    double bhi(int m, int j) const { return beta_hi[size_t(m - 1) * N + (j - 1)]; }
};

// Envelopes for m = 1..2R (at least m = 1..max(2R,2) so the m = 2 row is
// always available).
Envelopes build_envelopes(const Discretization& disc, int R);

struct Averages {
    std::vector<double> w, v;  // size N, 1-based semantics via index j-1
};

// Bracket [lo, hi] for A_m = (1/2) integral cos(pi m x / 2) M(x) dx.
std::pair<double, double> cos_bracket(const Averages& avg, const Envelopes& env, int m);

// Bracket for B_m = (1/2) integral sin(pi m x / 2) M(x) dx.
std::pair<double, double> sin_bracket(const Averages& avg, const Envelopes& env, int m);

// Bracket for the mean integral x M(x) dx.
std::pair<double, double> mean_bracket(const Averages& avg, double L);

// Bracket for the second moment integral x^2 M(x) dx.
std::pair<double, double> moment_bracket(const Averages& avg, double L);

}  // namespace minoverlap::intervals
