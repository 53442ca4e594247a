#include "minoverlap/oracle.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace minoverlap::oracle {

namespace {
constexpr double kPi = std::numbers::pi;
}

intervals::Averages averages(const piecewise::PiecewiseFn& M, int N) {
    if (N < 1) throw std::invalid_argument("averages: N must be positive");
    const double L = 2.0 / N;
    intervals::Averages avg;
    avg.w.resize(N);
    avg.v.resize(N);

    // Integrate the piecewise-linear M exactly over each cell by splitting
    // at its knots.
    auto cell_integral = [&](double a, double b) {
        double s = 0.0;
        const auto& kn = M.knots();
        double x0 = a;
        for (size_t i = 0; i + 1 < kn.size() && x0 < b; ++i) {
            const double lo = std::max(x0, kn[i]);
            const double hi = std::min(b, kn[i + 1]);
            if (hi <= lo) continue;
            const auto& p = M.pieces()[i];
            s += p[0] * (hi - lo) + p[1] * (hi * hi - lo * lo) / 2.0;
            x0 = hi;
        }
        return s;
    };

    for (int j = 1; j <= N; ++j) {
        avg.w[j - 1] = cell_integral((j - 1) * L, j * L) / L;
        avg.v[j - 1] = cell_integral(-j * L, -(j - 1) * L) / L;
    }
    return avg;
}

Assignment assignment(const piecewise::PiecewiseFn& f, const programs::ProgramInput& in,
                      int k_ext) {
    in.validate();
    if (in.kind != programs::ProgramKind::full)
        throw std::invalid_argument("assignment: full program inputs only");
    if (k_ext <= 0) k_ext = 20 * in.T;
    if (k_ext < 10 * in.T) throw std::invalid_argument("assignment: k_ext must be >= 10*T");

    const auto M = piecewise::overlap_with_complement(f);

    Assignment a;
    a.omega = M.sup_norm();
    a.avg = averages(M, in.N);
    a.mean = M.mean();
    a.second_moment = M.second_moment();

    std::ostringstream err;
    if (!(in.h1 <= a.mean && a.mean <= in.h2))
        err << "mean " << a.mean << " outside [" << in.h1 << ", " << in.h2 << "]; ";

    a.ft.T = in.T;
    a.ft.c.resize(in.T);
    a.ft.d.resize(in.T);
    std::vector<double> c_ext(k_ext), d_ext(k_ext);
    for (int k = 1; k <= k_ext; ++k) {
        const auto [ck, dk] = piecewise::fourier_f(f, k);
        c_ext[k - 1] = ck;
        d_ext[k - 1] = dk;
        if (k <= in.T) {
            a.ft.c[k - 1] = ck;
            a.ft.d[k - 1] = dk;
        }
    }
    if (in.T >= 1) {
        if (!(in.p1 <= a.ft.c[0] && a.ft.c[0] <= in.p2))
            err << "c_1 " << a.ft.c[0] << " outside [" << in.p1 << ", " << in.p2 << "]; ";
        if (!(in.q1 <= a.ft.d[0] && a.ft.d[0] <= in.q2))
            err << "d_1 " << a.ft.d[0] << " outside [" << in.q1 << ", " << in.q2 << "]; ";
    }
    if (!err.str().empty())
        throw std::domain_error("assignment: window hypothesis violated: " + err.str());

    // Tail remainders from the extended coefficients.
    a.eps.resize(in.R);
    a.del.resize(in.R);
    for (int i = 1; i <= in.R; ++i) {
        const int m = 2 * i - 1;
        const int sf = fourier::sine_factor(m);
        double se = 0.0, sd = 0.0;
        for (int k = in.T + 1; k <= k_ext; ++k) {
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            se += sign * c_ext[k - 1] / (double(m) * m - 4.0 * double(k) * k);
            sd += sign * k * d_ext[k - 1] / (double(m) * m - 4.0 * double(k) * k);
        }
        a.eps[i - 1] = (2.0 * m * sf / kPi) * se;
        a.del[i - 1] = (4.0 * sf / kPi) * sd;
    }
    return a;
}

std::vector<double> to_primal(const Assignment& a, const programs::VarLayout& lay) {
    std::vector<double> x(lay.count(), 0.0);
    x[lay.omega()] = a.omega;
    for (int j = 1; j <= lay.N; ++j) {
        x[lay.w(j)] = a.avg.w[j - 1];
        x[lay.v(j)] = a.avg.v[j - 1];
    }
    if (!lay.lp) {
        for (int k = 1; k <= lay.T; ++k) {
            x[lay.c(k)] = a.ft.c[k - 1];
            x[lay.d(k)] = a.ft.d[k - 1];
        }
        for (int i = 1; i <= lay.R; ++i) {
            x[lay.eps(i)] = a.eps[i - 1];
            x[lay.del(i)] = a.del[i - 1];
        }
    }
    return x;
}

}  // namespace minoverlap::oracle
