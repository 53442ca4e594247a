#include "minoverlap/fourier.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace minoverlap::fourier {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

int sine_factor(int m) {
    switch (((m % 4) + 4) % 4) {
        case 1: return 1;
        case 3: return -1;
        default: return 0;
    }
}

double a_coeff(int m, const Truncation& ft, double eps_m) {
    if (m < 1) throw std::invalid_argument("a_coeff: m must be positive");
    if (m % 2 == 0) {
        if (m / 2 > ft.T) throw std::out_of_range("a_coeff: even m needs m/2 <= T");
        return ft.c[m / 2 - 1] / 2.0;
    }
    // Odd m: constant term from c_0 = 1/2 plus the alternating sum over c_k.
    double sum = 1.0 / (2.0 * double(m) * double(m));
    double sign = -1.0;
    for (int k = 1; k <= ft.T; ++k) {
        sum += sign * ft.c[k - 1] / (double(m) * m - 4.0 * k * k);
        sign = -sign;
    }
    return eps_m + (2.0 * m * sine_factor(m) / kPi) * sum;
}

double b_coeff(int m, const Truncation& ft, double delta_m) {
    if (m < 1) throw std::invalid_argument("b_coeff: m must be positive");
    if (m % 2 == 0) {
        if (m / 2 > ft.T) throw std::out_of_range("b_coeff: even m needs m/2 <= T");
        return ft.d[m / 2 - 1] / 2.0;
    }
    double sum = 0.0;
    double sign = -1.0;
    for (int k = 1; k <= ft.T; ++k) {
        sum += sign * k * ft.d[k - 1] / (double(m) * m - 4.0 * k * k);
        sign = -sign;
    }
    return delta_m + (4.0 * sine_factor(m) / kPi) * sum;
}

double A_coeff(int m, double a_m, double b_m) {
    if (m < 1) throw std::invalid_argument("A_coeff: m must be positive");
    return (4.0 * sine_factor(m) / (m * kPi)) * a_m - 2.0 * (a_m * a_m + b_m * b_m);
}

double B_coeff(int m, double b_m) {
    if (m < 1) throw std::invalid_argument("B_coeff: m must be positive");
    return -(4.0 * sine_factor(m) / (m * kPi)) * b_m;
}

namespace {
void check_tail_args(int m, int T, const char* who) {
    if (m < 1 || m % 2 == 0) throw std::invalid_argument(std::string(who) + ": m must be odd and positive");
    if (T < 1 || m >= 2 * T) throw std::invalid_argument(std::string(who) + ": need 1 <= m < 2T");
}
}  // namespace

double tail_bound_cos(int m, int T) {
    check_tail_args(m, T, "tail_bound_cos");
    const double md = m, Td = T;
    double val = (1.0 / (4.0 - (md * md) / (Td * Td))) *
                 (2.0 * md / (kPi * std::sqrt(6.0 * Td * Td * Td)));
    // Outward by two ulps: covers rounding of the two factors and the product.
    return std::nextafter(std::nextafter(val, kInf), kInf);
}

double tail_bound_sin(int m, int T) {
    check_tail_args(m, T, "tail_bound_sin");
    const double md = m, Td = T;
    double val = (1.0 / (4.0 - (md * md) / (Td * Td))) *
                 (4.0 / (kPi * std::sqrt(2.0 * Td)));
    return std::nextafter(std::nextafter(val, kInf), kInf);
}

double second_moment_rhs(double mean) {
    return 2.0 / 3.0 + mean * mean / 2.0;
}

}  // namespace minoverlap::fourier
