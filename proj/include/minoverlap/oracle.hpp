#pragma once

// Reference assignments: given a concrete density f, produce the primal
// point (Omega, w, v, c, d, eps, delta) that any correctly built program
// must accept. Used to cross-check program construction independently of
// the solver.

#include <vector>

#include "minoverlap/fourier.hpp"
#include "minoverlap/intervals.hpp"
#include "minoverlap/piecewise.hpp"
#include "minoverlap/program.hpp"

namespace minoverlap::oracle {

// Cell averages of the overlap M over [0,2] (w) and [-2,0] (v).
intervals::Averages averages(const piecewise::PiecewiseFn& M, int N);

struct Assignment {
    double omega = 0.0;                // sup of M
    intervals::Averages avg;           // cell averages of M
    fourier::Truncation ft;            // c_1..c_T, d_1..d_T of f
    std::vector<double> eps, del;      // tail remainders at odd 2i-1, i = 1..R
    double mean = 0.0;                 // integral x M dx
    double second_moment = 0.0;        // integral x^2 M dx
};

// Evaluate f's data for the program input. Tail remainders are summed out to
// k_ext terms (defaults to 20*T when k_ext <= 0; requires k_ext >= 10*T).
// Throws when f violates a window hypothesis (mean outside [h1,h2], c_1
// outside [p1,p2], d_1 outside [q1,q2]) with the violated bound in the text.
Assignment assignment(const piecewise::PiecewiseFn& f, const programs::ProgramInput& in,
                      int k_ext = 0);

// Assignment packed in the full program's variable order.
std::vector<double> to_primal(const Assignment& a, const programs::VarLayout& lay);

}  // namespace minoverlap::oracle
