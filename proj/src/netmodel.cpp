#include "soclab/netmodel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "soclab/specfun.hpp"

namespace soclab {

namespace {

using std::numbers::pi;

// Gamma(1 + delta) Gamma(1 - delta) = pi delta / sin(pi delta)
double gamma_product(double delta) {
    return pi * delta / std::sin(pi * delta);
}

bool is_positive_integer(Complex b, int& out) {
    if (b.imag() != 0.0 || b.real() < 1.0 || b.real() > 1e6) {
        return false;
    }
    const double r = std::round(b.real());
    if (r != b.real()) {
        return false;
    }
    out = static_cast<int>(r);
    return true;
}

void require_open_unit(double value, const char* name) {
    if (!(value > 0.0 && value < 1.0)) {
        throw std::domain_error(std::string(name) + " must lie in (0, 1)");
    }
}

}  // namespace

ModelParams::ModelParams(double lambda, double p, double theta, double alpha,
                         LinkDistanceModel link)
    : lambda_(lambda), p_(p), theta_(theta), alpha_(alpha), link_(link) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::domain_error("lambda must be positive");
    }
    if (!(p > 0.0 && p <= 1.0)) {
        throw std::domain_error("p must lie in (0, 1]");
    }
    if (!(theta > 0.0) || !std::isfinite(theta)) {
        throw std::domain_error("theta must be positive");
    }
    if (!(alpha > 2.0) || !std::isfinite(alpha)) {
        throw std::domain_error("alpha must exceed 2");
    }
    if (const auto* fixed = std::get_if<FixedDistance>(&link_); fixed && !(fixed->r > 0.0)) {
        throw std::domain_error("link distance R must be positive");
    }
    if (const auto* ray = std::get_if<RayleighNearest>(&link_); ray && !(ray->mu > 0.0)) {
        throw std::domain_error("receiver density mu must be positive");
    }
}

LinkKind ModelParams::link_kind() const {
    return std::holds_alternative<FixedDistance>(link_) ? LinkKind::fixed : LinkKind::rayleigh;
}

ModelParams ModelParams::with_lambda(double lambda) const {
    return {lambda, p_, theta_, alpha_, link_};
}

ModelParams ModelParams::with_p(double p) const {
    return {lambda_, p, theta_, alpha_, link_};
}

ModelParams ModelParams::with_lambda_p(double lambda, double p) const {
    return {lambda, p, theta_, alpha_, link_};
}

ModelParams normalize_scale(const ModelParams& params) {
    const auto* fixed = std::get_if<FixedDistance>(&params.link());
    if (fixed == nullptr) {
        return params;
    }
    const double r = fixed->r;
    return {params.lambda() * r * r, params.p(), params.theta(), params.alpha(), FixedDistance{1.0}};
}

double diversity_poly_integer(int b, double p, double delta) {
    if (b < 0) {
        throw std::domain_error("diversity_poly_integer: b must be nonnegative");
    }
    double sum = 0.0;
    double binom_b = 1.0;      // C(b, k)
    double binom_delta = 1.0;  // C(delta - 1, k - 1)
    double pk = 1.0;
    for (int k = 1; k <= b; ++k) {
        binom_b *= static_cast<double>(b - k + 1) / k;
        if (k > 1) {
            binom_delta *= (delta - static_cast<double>(k - 1)) / static_cast<double>(k - 1);
        }
        pk *= p;
        sum += binom_b * binom_delta * pk;
    }
    return sum;
}

Complex diversity_poly(Complex b, double p, double delta) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw std::domain_error("diversity_poly: p must lie in (0, 1]");
    }
    require_open_unit(delta, "diversity_poly: delta");
    if (b == 0.0) {
        return 0.0;
    }
    int n = 0;
    const bool integer_order = is_positive_integer(b, n);
    if (p == 1.0) {
        if (!(b.real() + delta > 0.0)) {
            throw std::domain_error("diversity_poly: Re(b) + delta must be positive at p = 1");
        }
        // b 2F1(1-b, 1-delta; 2; 1) = Gamma(b+delta) / (Gamma(b) Gamma(1+delta))
        return std::exp(specfun::ln_gamma(b + delta) - specfun::ln_gamma(b) -
                        std::lgamma(1.0 + delta));
    }
    // The alternating finite sum loses digits once the binomials grow large.
    if (integer_order && n * p <= specfun::Tolerances::direct_series_limit) {
        return diversity_poly_integer(n, p, delta);
    }
    return p * b * specfun::hyp2f1(1.0 - b, 1.0 - delta, 2.0, p);
}

double diversity_poly_asymptotic(double b, double p, double delta) {
    return std::pow(p * b, delta) / std::tgamma(1.0 + delta);
}

double diversity_poly_slope_at_zero(double p, double delta) {
    return -std::expm1(delta * std::log1p(-p)) / delta;
}

double interference_constant(const ModelParams& params) {
    const double delta = params.delta();
    const double base = params.lambda() * std::pow(params.theta(), delta) * gamma_product(delta);
    if (const auto* fixed = std::get_if<FixedDistance>(&params.link())) {
        return base * pi * fixed->r * fixed->r;
    }
    return base / std::get<RayleighNearest>(params.link()).mu;
}

Complex log_moment(const ModelParams& params, Complex b) {
    const Complex d = diversity_poly(b, params.p(), params.delta());
    const double k = interference_constant(params);
    if (params.link_kind() == LinkKind::fixed) {
        return -k * d;
    }
    return -std::log(1.0 + k * d);
}

MomentValue moment(const ModelParams& params, Complex b) {
    return {b, std::exp(log_moment(params, b)), params.link_kind()};
}

double mean_success(const ModelParams& params) {
    const double k = interference_constant(params) * params.p();
    return params.link_kind() == LinkKind::fixed ? std::exp(-k) : 1.0 / (1.0 + k);
}

double variance_ps(const ModelParams& params) {
    const double m1 = mean_success(params);
    const double m2 = moment(params, 2.0).value.real();
    return std::max(0.0, m2 - m1 * m1);
}

double variance_ps_closed_form(const ModelParams& params) {
    const double m1 = mean_success(params);
    const double expo = params.p() * (params.delta() - 1.0) * std::log(m1);
    return m1 * m1 * std::expm1(expo);
}

double ps_inverse(double target, const ModelParams& params_template) {
    require_open_unit(target, "ps_inverse: target");
    if (params_template.link_kind() != LinkKind::fixed) {
        throw std::domain_error("ps_inverse: defined for the fixed link-distance model");
    }
    // interference constant per unit lambda (p does not enter)
    const double c_theta = interference_constant(params_template.with_lambda(1.0));
    return -std::log(target) / c_theta;
}

}  // namespace soclab
