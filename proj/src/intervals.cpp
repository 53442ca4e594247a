#include "minoverlap/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace minoverlap::intervals {

namespace {
constexpr double kPi = std::numbers::pi;
}

Discretization::Discretization(int n) : N(n), L(2.0 / n) {
    if (n < 1) throw std::invalid_argument("Discretization: N must be positive");
}

Envelopes build_envelopes(const Discretization& disc, int R) {
    if (R < 0) throw std::invalid_argument("build_envelopes: R must be nonnegative");
    Envelopes env;
    env.N = disc.N;
    env.L = disc.L;
    env.max_m = std::max(2 * R, 2);
    const size_t total = size_t(env.max_m) * disc.N;
    env.alpha_lo.resize(total);
    env.alpha_hi.resize(total);
    env.beta_lo.resize(total);
    env.beta_hi.resize(total);
    for (int m = 1; m <= env.max_m; ++m) {
        // Per-cell deviation pi*m*L/4 dominates the exact oscillation
        // 2*sin(pi*m*L/8) with cubic-order slack, which absorbs the rounding
        // of cos/sin at the midpoint.
        const double base = kPi * m * disc.L;
        const double t = base / 4.0;
        for (int j = 1; j <= disc.N; ++j) {
            const double mid = base * (j - 0.5) / 2.0;
            const double c = std::cos(mid), s = std::sin(mid);
            const size_t at = size_t(m - 1) * disc.N + (j - 1);
            env.alpha_lo[at] = c - t;
            env.alpha_hi[at] = c + t;
            env.beta_lo[at] = s - t;
            env.beta_hi[at] = s + t;
        }
    }
    return env;
}

namespace {
void check_m(const Envelopes& env, int m, const char* who) {
    if (m < 1 || m > env.max_m) throw std::invalid_argument(std::string(who) + ": m out of envelope range");
}
void check_sizes(const Averages& avg, int N, const char* who) {
    if (int(avg.w.size()) != N || int(avg.v.size()) != N)
        throw std::invalid_argument(std::string(who) + ": averages size mismatch");
}
}  // namespace

std::pair<double, double> cos_bracket(const Averages& avg, const Envelopes& env, int m) {
    check_m(env, m, "cos_bracket");
    check_sizes(avg, env.N, "cos_bracket");
    double lo = 0.0, hi = 0.0;
    for (int j = 1; j <= env.N; ++j) {
        const double sum = avg.w[j - 1] + avg.v[j - 1];
        lo += env.alo(m, j) * sum;
        hi += env.ahi(m, j) * sum;
    }
    return {env.L / 2.0 * lo, env.L / 2.0 * hi};
}

std::pair<double, double> sin_bracket(const Averages& avg, const Envelopes& env, int m) {
    check_m(env, m, "sin_bracket");
    check_sizes(avg, env.N, "sin_bracket");
    double lo = 0.0, hi = 0.0;
    for (int j = 1; j <= env.N; ++j) {
        lo += env.blo(m, j) * avg.w[j - 1] - env.bhi(m, j) * avg.v[j - 1];
        hi += env.bhi(m, j) * avg.w[j - 1] - env.blo(m, j) * avg.v[j - 1];
    }
    return {env.L / 2.0 * lo, env.L / 2.0 * hi};
}

std::pair<double, double> mean_bracket(const Averages& avg, double L) {
    const int N = int(avg.w.size());
    if (int(avg.v.size()) != N) throw std::invalid_argument("mean_bracket: size mismatch");
    double lo = 0.0, hi = 0.0;
    for (int j = 1; j <= N; ++j) {
        lo += (j - 1) * avg.w[j - 1] - double(j) * avg.v[j - 1];
        hi += double(j) * avg.w[j - 1] - (j - 1) * avg.v[j - 1];
    }
    return {L * L * lo, L * L * hi};
}

std::pair<double, double> moment_bracket(const Averages& avg, double L) {
    const int N = int(avg.w.size());
    if (int(avg.v.size()) != N) throw std::invalid_argument("moment_bracket: size mismatch");
    double lo = 0.0, hi = 0.0;
    for (int j = 1; j <= N; ++j) {
        const double sum = avg.w[j - 1] + avg.v[j - 1];
        lo += double(j - 1) * (j - 1) * sum;
        hi += double(j) * j * sum;
    }
    return {L * L * L * lo, L * L * L * hi};
}

}  // namespace minoverlap::intervals
