#include "minoverlap/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace minoverlap::piecewise {

PiecewiseFn::PiecewiseFn(std::vector<double> knots, std::vector<std::array<double, 2>> pieces)
    : knots_(std::move(knots)), pieces_(std::move(pieces)) {
    if (knots_.size() < 2 || pieces_.size() + 1 != knots_.size())
        throw std::invalid_argument("PiecewiseFn: need k+1 knots for k pieces");
    for (size_t i = 0; i + 1 < knots_.size(); ++i)
        if (!(knots_[i] < knots_[i + 1]))
            throw std::invalid_argument("PiecewiseFn: knots must be strictly increasing");
}

PiecewiseFn PiecewiseFn::step(std::vector<double> knots, std::vector<double> values) {
    std::vector<std::array<double, 2>> pieces(values.size());
    for (size_t i = 0; i < values.size(); ++i) pieces[i] = {values[i], 0.0};
    return PiecewiseFn(std::move(knots), std::move(pieces));
}

bool PiecewiseFn::constant_pieces() const {
    return std::all_of(pieces_.begin(), pieces_.end(),
                       [](const auto& p) { return p[1] == 0.0; });
}

double PiecewiseFn::operator()(double x) const {
    if (x < lo() || x > hi()) return 0.0;
    // Last knot belongs to the last piece.
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    size_t i = size_t(it - knots_.begin());
    i = (i == 0) ? 0 : i - 1;
    if (i >= pieces_.size()) i = pieces_.size() - 1;
    return pieces_[i][0] + pieces_[i][1] * x;
}

double PiecewiseFn::integral() const {
    double s = 0.0;
    for (size_t i = 0; i < pieces_.size(); ++i) {
        const double x0 = knots_[i], x1 = knots_[i + 1];
        s += pieces_[i][0] * (x1 - x0) + pieces_[i][1] * (x1 * x1 - x0 * x0) / 2.0;
    }
    return s;
}

double PiecewiseFn::mean() const {
    double s = 0.0;
    for (size_t i = 0; i < pieces_.size(); ++i) {
        const double x0 = knots_[i], x1 = knots_[i + 1];
        s += pieces_[i][0] * (x1 * x1 - x0 * x0) / 2.0 +
             pieces_[i][1] * (x1 * x1 * x1 - x0 * x0 * x0) / 3.0;
    }
    return s;
}

double PiecewiseFn::second_moment() const {
    double s = 0.0;
    for (size_t i = 0; i < pieces_.size(); ++i) {
        const double x0 = knots_[i], x1 = knots_[i + 1];
        s += pieces_[i][0] * (x1 * x1 * x1 - x0 * x0 * x0) / 3.0 +
             pieces_[i][1] * (x1 * x1 * x1 * x1 - x0 * x0 * x0 * x0) / 4.0;
    }
    return s;
}

double PiecewiseFn::sup_norm() const {
    double m = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < pieces_.size(); ++i) {
        m = std::max(m, pieces_[i][0] + pieces_[i][1] * knots_[i]);
        m = std::max(m, pieces_[i][0] + pieces_[i][1] * knots_[i + 1]);
    }
    return m;
}

double PiecewiseFn::min_value() const {
    double m = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < pieces_.size(); ++i) {
        m = std::min(m, pieces_[i][0] + pieces_[i][1] * knots_[i]);
        m = std::min(m, pieces_[i][0] + pieces_[i][1] * knots_[i + 1]);
    }
    return m;
}

double PiecewiseFn::trig_cos(double omega) const {
    if (omega == 0.0) return integral();
    double s = 0.0;
    const double w2 = omega * omega;
    for (size_t i = 0; i < pieces_.size(); ++i) {
        const double x0 = knots_[i], x1 = knots_[i + 1];
        const double s0 = std::sin(omega * x0), s1 = std::sin(omega * x1);
        const double c0 = std::cos(omega * x0), c1 = std::cos(omega * x1);
        s += pieces_[i][0] * (s1 - s0) / omega;
        s += pieces_[i][1] * ((c1 - c0) / w2 + (x1 * s1 - x0 * s0) / omega);
    }
    return s;
}

double PiecewiseFn::trig_sin(double omega) const {
    if (omega == 0.0) return 0.0;
    double s = 0.0;
    const double w2 = omega * omega;
    for (size_t i = 0; i < pieces_.size(); ++i) {
        const double x0 = knots_[i], x1 = knots_[i + 1];
        const double s0 = std::sin(omega * x0), s1 = std::sin(omega * x1);
        const double c0 = std::cos(omega * x0), c1 = std::cos(omega * x1);
        s += pieces_[i][0] * (c0 - c1) / omega;
        s += pieces_[i][1] * ((s1 - s0) / w2 - (x1 * c1 - x0 * c0) / omega);
    }
    return s;
}

PiecewiseFn overlap_with_complement(const PiecewiseFn& f) {
    if (!f.constant_pieces())
        throw std::invalid_argument("overlap_with_complement: f must be piecewise constant");
    if (f.lo() != -1.0 || f.hi() != 1.0)
        throw std::invalid_argument("overlap_with_complement: f must live on [-1,1]");
    if (f.min_value() < -1e-12 || f.sup_norm() > 1.0 + 1e-12)
        throw std::invalid_argument("overlap_with_complement: f must map into [0,1]");
    if (std::abs(f.integral() - 1.0) > 1e-9)
        throw std::invalid_argument("overlap_with_complement: f must have integral 1");

    const auto& kn = f.knots();
    const int P = f.piece_count();
    std::vector<double> fv(P), gv(P);
    for (int i = 0; i < P; ++i) {
        fv[i] = f.pieces()[i][0];
        gv[i] = 1.0 - fv[i];
    }

    // M is linear between breakpoint differences; evaluate it exactly there.
    std::vector<double> xs;
    xs.reserve(size_t(P + 1) * (P + 1));
    for (double a : kn)
        for (double b : kn) xs.push_back(a - b);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    auto eval = [&](double x) {
        double s = 0.0;
        for (int i = 0; i < P; ++i) {
            if (fv[i] == 0.0) continue;
            const double t0 = kn[i], t1 = kn[i + 1];
            for (int j = 0; j < P; ++j) {
                if (gv[j] == 0.0) continue;
                const double a = std::max(t0, kn[j] - x);
                const double b = std::min(t1, kn[j + 1] - x);
                if (b > a) s += fv[i] * gv[j] * (b - a);
            }
        }
        return s;
    };

    std::vector<double> ys(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) ys[i] = eval(xs[i]);

    std::vector<std::array<double, 2>> pieces(xs.size() - 1);
    for (size_t i = 0; i + 1 < xs.size(); ++i) {
        const double slope = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        pieces[i] = {ys[i] - slope * xs[i], slope};
    }
    return PiecewiseFn(std::move(xs), std::move(pieces));
}

std::pair<double, double> fourier_f(const PiecewiseFn& f, int k) {
    if (k < 0) throw std::invalid_argument("fourier_f: k must be nonnegative");
    const double omega = std::numbers::pi * k;
    return {f.trig_cos(omega), f.trig_sin(omega)};
}

PiecewiseFn parse_step_fixture(std::istream& in) {
    std::vector<double> knots, values;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        std::vector<double>* dst = nullptr;
        if (key == "breakpoints") dst = &knots;
        else if (key == "values") dst = &values;
        else throw std::invalid_argument("fixture: unknown key '" + key + "'");
        double x;
        while (ls >> x) dst->push_back(x);
    }
    if (knots.empty() || values.empty())
        throw std::invalid_argument("fixture: need breakpoints and values lines");
    return PiecewiseFn::step(std::move(knots), std::move(values));
}

PiecewiseFn load_step_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open fixture: " + path);
    return parse_step_fixture(in);
}

}  // namespace minoverlap::piecewise
