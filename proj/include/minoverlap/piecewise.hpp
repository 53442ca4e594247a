#pragma once

// Piecewise polynomial functions of degree <= 1 with exact (closed-form)
// integral operations. Used as the independent reference implementation:
// densities f are piecewise constant on [-1,1], their overlap
// M = f * (1 - f(-.)) is piecewise linear on [-2,2], and every moment or
// trigonometric integral evaluates in closed form.

#include <array>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace minoverlap::piecewise {

class PiecewiseFn {
public:
    // knots strictly increasing, one [a,b] coefficient pair per interval:
    // value on [knots[i], knots[i+1]) is a + b*x.
    PiecewiseFn(std::vector<double> knots, std::vector<std::array<double, 2>> pieces);

    // Piecewise-constant builder: values[i] on [knots[i], knots[i+1]).
    static PiecewiseFn step(std::vector<double> knots, std::vector<double> values);

    double lo() const { return knots_.front(); }
    double hi() const { return knots_.back(); }
    int piece_count() const { return int(pieces_.size()); }
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<std::array<double, 2>>& pieces() const { return pieces_; }
    bool constant_pieces() const;

    double operator()(double x) const;  // 0 outside [lo, hi]

    double integral() const;        // integral of f
    double mean() const;            // integral of x f(x)
    double second_moment() const;   // integral of x^2 f(x)
    double sup_norm() const;        // max over the closure of each piece
    double min_value() const;

    // integral cos(omega x) f(x) dx and the sine counterpart, closed form.
    double trig_cos(double omega) const;
    double trig_sin(double omega) const;

private:
    std::vector<double> knots_;
    std::vector<std::array<double, 2>> pieces_;
};

// Overlap of a density with its complement: M(x) = integral f(t)(1-f(x+t))dt.
// Requires f piecewise constant on [-1,1] with 0 <= f <= 1 and integral 1
// (within 1e-9). Result is piecewise linear on [-2,2], computed exactly at
// every breakpoint difference.
PiecewiseFn overlap_with_complement(const PiecewiseFn& f);

// Fourier pair (c_k, d_k) of a density at frequency pi k.
std::pair<double, double> fourier_f(const PiecewiseFn& f, int k);

// Plain text fixture format:
//   lines of "breakpoints x0 x1 ..." and "values y0 y1 ..." ('#' comments).
PiecewiseFn parse_step_fixture(std::istream& in);
PiecewiseFn load_step_fixture(const std::string& path);

}  // namespace minoverlap::piecewise
