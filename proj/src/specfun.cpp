#include "soclab/specfun.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/lambert_w.hpp>

namespace soclab::specfun {

namespace {

using std::numbers::pi;

constexpr Complex kJ{0.0, 1.0};

// Lanczos approximation, g = 607/128, 15 terms.
constexpr double kLanczosG = 607.0 / 128.0;
constexpr std::array<double, 15> kLanczos = {
    0.99999999999999709182,     57.156235665862923517,     -59.597960355475491248,
    14.136097974741747174,      -0.49191381609762019978,   .33994649984811888699e-4,
    .46523628927048575665e-4,   -.98374475304879564677e-4, .15808870322491248884e-3,
    -.21026444172410488319e-3,  .21743961811521264320e-3,  -.16431810653676389022e-3,
    .84418223983852743293e-4,   -.26190838401581408670e-4, .36899182659531622704e-5};

bool near_nonpositive_integer(Complex z) {
    if (std::abs(z.imag()) > Tolerances::pole || z.real() > 0.5) {
        return false;
    }
    return std::abs(z.real() - std::round(z.real())) <= Tolerances::pole;
}

// log(sin(pi z)) without overflow for large |Im z|.
Complex log_sin_pi(Complex z) {
    const Complex w = pi * z;
    if (std::abs(w.imag()) < 20.0) {
        return std::log(std::sin(w));
    }
    if (w.imag() > 0.0) {
        return -kJ * w + std::log(Complex{0.0, 0.5}) + std::log(1.0 - std::exp(2.0 * kJ * w));
    }
    return kJ * w + std::log(Complex{0.0, -0.5}) + std::log(1.0 - std::exp(-2.0 * kJ * w));
}

Complex ln_gamma_lanczos(Complex z) {
    // Gamma(z) = sqrt(2 pi) / z * series * t^(z + 1/2) e^(-t), t = z + g + 1/2
    Complex series = kLanczos[0];
    for (std::size_t k = 1; k < kLanczos.size(); ++k) {
        series += kLanczos[k] / (z + static_cast<double>(k));
    }
    const Complex t = z + kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(series / z);
}

bool is_nonpositive_integer(Complex a) {
    return a.imag() == 0.0 && a.real() <= 0.0 && a.real() == std::round(a.real());
}

double distance_to_integers(Complex z) {
    return std::abs(z - Complex{std::round(z.real()), 0.0});
}

// Gauss series sum_k (a)_k (b)_k / ((c)_k k!) x^k with complex parameters.
Complex gauss_series(Complex a, Complex b, Complex c, double x) {
    Complex sum = 1.0;
    Complex term = 1.0;
    for (std::size_t k = 0; k < Tolerances::series_max_terms; ++k) {
        const double kd = static_cast<double>(k);
        const Complex ratio = (a + kd) * (b + kd) / ((c + kd) * (kd + 1.0)) * x;
        term *= ratio;
        sum += term;
        if (term == 0.0) {
            return sum;
        }
        if (std::abs(term) <= Tolerances::series_rel * std::abs(sum) && std::abs(ratio) < 1.0) {
            return sum;
        }
    }
    throw ConvergenceError("hyp2f1: series did not converge within the term cap");
}

// Connection formula around x = 1 (c - a - b not an integer):
// F(a,b;c;x) = A F(a,b;a+b-c+1;1-x) + B (1-x)^(c-a-b) F(c-a,c-b;c-a-b+1;1-x)
Complex hyp2f1_connection(Complex a, double b, double c, double x) {
    const Complex s = c - a - b;
    const Complex log_a_coef = ln_gamma(c) + ln_gamma(s) - ln_gamma(c - a) - ln_gamma(c - b);
    const double y = 1.0 - x;
    const Complex first = std::exp(log_a_coef) * gauss_series(a, b, a + b - c + 1.0, y);
    if (near_nonpositive_integer(a)) {
        // 1/Gamma(a) = 0: the polynomial needs only the first term
        return first;
    }
    const Complex log_b_coef = ln_gamma(c) + ln_gamma(-s) - ln_gamma(a) - ln_gamma(b);
    const Complex second = gauss_series(c - a, c - b, s + 1.0, y);
    return first + std::exp(log_b_coef + s * std::log(y)) * second;
}

Complex checked(Complex value, const char* what) {
    if (!is_finite(value)) {
        throw ConvergenceError(std::string(what) + ": non-finite result");
    }
    return value;
}

}  // namespace

Complex ln_gamma(Complex z) {
    if (near_nonpositive_integer(z)) {
        throw PoleError("ln_gamma: pole at nonpositive integer " + std::to_string(z.real()));
    }
    if (z.real() < 0.5) {
        // Reflection: Gamma(z) Gamma(1 - z) = pi / sin(pi z)
        return std::log(pi) - log_sin_pi(z) - ln_gamma_lanczos(1.0 - z);
    }
    return ln_gamma_lanczos(z);
}

double gamma_ratio(double b, double delta) {
    if (!(b > 0.0)) {
        throw std::domain_error("gamma_ratio: b must be positive");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::domain_error("gamma_ratio: delta must lie in (0, 1)");
    }
    return 1.0 / boost::math::tgamma_delta_ratio(b, delta);
}

Complex hyp2f1(Complex a, double b, double c, double x) {
    if (!(c > 0.0)) {
        throw std::domain_error("hyp2f1: c must be positive");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("hyp2f1: x must lie in [0, 1]");
    }
    if (x == 0.0 || a == 0.0 || b == 0.0) {
        return 1.0;
    }
    if (x == 1.0) {
        const Complex s = c - a - b;
        if (!(s.real() > 0.0)) {
            throw std::domain_error("hyp2f1: Re(c - a - b) must be positive at x = 1");
        }
        // 1/Gamma vanishes at the poles of c - a, c - b
        if (is_nonpositive_integer(c - a) || is_nonpositive_integer(Complex{c - b})) {
            return 0.0;
        }
        return checked(std::exp(ln_gamma(c) + ln_gamma(s) - ln_gamma(c - a) - ln_gamma(c - b)),
                       "hyp2f1");
    }
    const bool large = std::abs(a) * x > Tolerances::direct_series_limit;
    if (large && !is_nonpositive_integer(Complex{b}) &&
        distance_to_integers(c - a - b) > Tolerances::connection_gap) {
        return checked(hyp2f1_connection(a, b, c, x), "hyp2f1");
    }
    return checked(gauss_series(a, b, c, x), "hyp2f1");
}

double reg_inc_beta(double x, double y, double z) {
    if (!(x >= 0.0 && x <= 1.0) || !(y > 0.0) || !(z > 0.0)) {
        throw std::domain_error("reg_inc_beta: requires x in [0,1], y > 0, z > 0");
    }
    return boost::math::ibeta(y, z, x);
}

double lambert_w0(double x) {
    constexpr double kBranchPoint = -1.0 / std::numbers::e;
    if (!(x >= kBranchPoint)) {
        throw std::domain_error("lambert_w0: argument below -1/e");
    }
    if (x == kBranchPoint) {
        return -1.0;
    }
    return boost::math::lambert_w0(x);
}

}  // namespace soclab::specfun
