#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>

// Special functions needed by the moment and meta-distribution formulas:
// complex log-gamma, the Gauss hypergeometric function with a complex upper
// parameter, the regularized incomplete beta function and Lambert W.

namespace soclab::specfun {

using Complex = std::complex<double>;

/// Numerical constants shared by every routine in this header.
struct Tolerances {
    static constexpr double series_rel = 1e-16;
    static constexpr std::size_t series_max_terms = 1'000'000;
    static constexpr double pole = 1e-14;
    static constexpr double lambert_residual = 1e-12;
    // |a|*x above which the 1-x connection formula replaces the direct series
    static constexpr double direct_series_limit = 4.0;
    // minimum distance of c-a-b from the integers for the connection formula
    static constexpr double connection_gap = 1e-6;
};

class PoleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Log-gamma for complex argument. Only exp(ln_gamma(z)) is meaningful: the
/// imaginary part is determined modulo 2*pi. Throws PoleError at z = 0, -1, ...
Complex ln_gamma(Complex z);

/// Gamma(b + delta) / Gamma(b) for b > 0, delta in (0, 1).
double gamma_ratio(double b, double delta);

/// 2F1(a, b; c; x) for complex a, real b and c > 0, x in [0, 1].
/// At x = 1 requires Re(c - a - b) > 0 and uses Gauss's summation theorem.
Complex hyp2f1(Complex a, double b, double c, double x);

/// Regularized incomplete beta function I_x(y, z).
double reg_inc_beta(double x, double y, double z);

/// Principal branch of the Lambert W function, x >= -1/e.
double lambert_w0(double x);

/// True when every component of z is finite.
inline bool is_finite(Complex z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

}  // namespace soclab::specfun
