#include "soclab/metadist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/minima.hpp>

#include "soclab/quadrature.hpp"
#include "soclab/specfun.hpp"

namespace soclab {

namespace {

using std::numbers::pi;
constexpr Complex kJ{0.0, 1.0};

void require_eps(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw std::domain_error("eps must lie in (0, 1)");
    }
}

double target_log(double eps) {
    return -std::log1p(-eps);
}

// Mean of Y = -ln P_s.
double mean_log_loss(const ModelParams& params) {
    return interference_constant(params) *
           diversity_poly_slope_at_zero(params.p(), params.delta());
}

MetaResult finish(const ModelParams& params, double eta, double err, MetaMethod method,
                  MetaStatus status, double shift) {
    MetaResult out;
    out.eta = std::clamp(eta, 0.0, 1.0);
    out.lambda_eps = params.lambda() * params.p() * out.eta;
    out.method = method;
    out.err_estimate = err;
    out.status = status;
    out.contour_shift = shift;
    return out;
}

struct Integral {
    double value = 0.0;
    double error = 0.0;
    MetaStatus status = MetaStatus::ok;
};

// Integrates f over [0, inf) in panels of width `width`. `envelope(u)` bounds
// |f| beyond u. Stops when the envelope tail or the Wynn-extrapolated partial
// sums meet `tol`.
template <class F, class Env>
Integral integrate_panels(const F& f, const Env& envelope, double width, double tol,
                          const GilPelaezConfig& cfg, bool allow_extrapolation) {
    const std::function<double(double)> fn = f;
    Integral out;
    quad::WynnEpsilon wynn;
    double sum = 0.0;
    double quad_err = 0.0;
    const double panel_tol = 0.05 * tol;
    int stable = 0;
    for (std::size_t k = 0; k < cfg.max_panels; ++k) {
        const double a = static_cast<double>(k) * width;
        const double b = a + width;
        if (a >= cfg.u_max_cap) {
            break;
        }
        const auto est = quad::integrate_gk15(fn, a, b, panel_tol, 400);
        if (!est.converged) {
            out.status = MetaStatus::not_converged;
        }
        sum += est.value;
        quad_err += est.error;
        wynn.push(sum);

        const double tail = envelope(b) * width;
        if (tail < 0.1 * tol) {
            out.value = sum;
            out.error = quad_err + tail;
            return out;
        }
        if (allow_extrapolation && k >= 6) {
            stable = (wynn.error() < 0.1 * tol) ? stable + 1 : 0;
            if (stable >= 3) {
                out.value = wynn.value();
                out.error = quad_err + wynn.error();
                return out;
            }
        }
    }
    if (out.status == MetaStatus::ok) {
        out.status = MetaStatus::truncated;
    }
    const bool use_wynn = allow_extrapolation && wynn.size() > 3 && std::isfinite(wynn.error());
    out.value = use_wynn ? wynn.value() : sum;
    out.error = quad_err + (use_wynn ? wynn.error() : std::numeric_limits<double>::infinity());
    return out;
}

MetaResult eta_classical(const ModelParams& params, double eps, const GilPelaezConfig& cfg) {
    const double y0 = target_log(eps);
    const double g0 = gil_pelaez_integrand_at_zero(params, eps);
    auto f = [&](double u) {
        if (u < cfg.u_min) {
            return g0;
        }
        return std::imag(std::exp(kJ * u * y0 + log_moment(params, kJ * u))) / u;
    };
    auto envelope = [&](double u) {
        return std::exp(log_moment(params, kJ * u).real()) / u;
    };
    const double tol = cfg.abs_tol * pi;
    const double width = pi / y0;
    const Integral integral = integrate_panels(f, envelope, width, tol, cfg, true);
    MetaStatus status = integral.status;
    const double err = integral.error / pi;
    if (status == MetaStatus::ok && err > cfg.abs_tol) {
        status = MetaStatus::not_converged;
    }
    return finish(params, 0.5 + integral.value / pi, err, MetaMethod::gil_pelaez, status, 0.0);
}

// phi(c) = c y0 + ln M_c is convex; its minimizer over c >= 0 is the saddle
// point of the Laplace inversion integrand.
double saddle_point(const ModelParams& params, double y0) {
    auto phi = [&](double c) { return c * y0 + log_moment(params, c).real(); };
    double hi = 1.0;
    while (phi(2.0 * hi) < phi(hi) && hi < 1e12) {
        hi *= 2.0;
    }
    const auto best = boost::math::tools::brent_find_minima(phi, 0.0, 2.0 * hi, 40);
    return best.first;
}

// Moves c away from points where c + delta is an integer, where the
// hypergeometric connection formula is ill-conditioned.
double nudge_shift(double c, double delta) {
    const double frac = c + delta - std::floor(c + delta);
    if (frac < 0.1) {
        return c + (0.1 - frac);
    }
    if (frac > 0.9) {
        return c - (frac - 0.9);
    }
    return c;
}

MetaResult eta_shifted(const ModelParams& params, double eps, double c,
                       const GilPelaezConfig& cfg) {
    // P(Y <= y0) = e^{c y0} M_c / pi * int_0^inf Re[e^{j u y0} M_{c+ju} / (M_c (c + j u))] du
    const double y0 = target_log(eps);
    const double log_mc = log_moment(params, c).real();
    const double log_prefactor = c * y0 + log_mc;
    auto f = [&](double u) {
        const Complex s{c, u};
        const Complex z = kJ * u * y0 + log_moment(params, s) - log_mc;
        return std::real(std::exp(z) / s);
    };
    auto envelope = [&](double u) {
        return std::exp(log_moment(params, Complex{c, u}).real() - log_mc) / std::hypot(c, u);
    };
    const double width = pi / y0;
    // Scale of the normalized integral from a single rule on the first panel.
    const double first_width = std::min(width, cfg.u_max_cap);
    const auto rough = quad::integrate_gk15(f, 0.0, first_width, std::numeric_limits<double>::max());
    const double scale = std::max(std::abs(rough.value), 1e-300);
    const double abs_cap = cfg.abs_tol * pi * std::exp(-log_prefactor);
    const double tol = std::min(cfg.rel_tol_tail * scale, abs_cap);
    const Integral integral = integrate_panels(f, envelope, width, tol, cfg, true);
    const double prefactor = std::exp(log_prefactor);
    const double eta = prefactor * integral.value / pi;
    const double err = prefactor * integral.error / pi;
    MetaStatus status = integral.status;
    if (status == MetaStatus::ok && err > cfg.abs_tol) {
        status = MetaStatus::not_converged;
    }
    return finish(params, eta, err, MetaMethod::gil_pelaez, status, c);
}

}  // namespace

std::string_view to_string(MetaMethod method) {
    switch (method) {
        case MetaMethod::gil_pelaez: return "gil_pelaez";
        case MetaMethod::beta_approx: return "beta_approx";
        case MetaMethod::monte_carlo: return "monte_carlo";
    }
    return "unknown";
}

std::string_view to_string(MetaStatus status) {
    switch (status) {
        case MetaStatus::ok: return "ok";
        case MetaStatus::truncated: return "truncated";
        case MetaStatus::not_converged: return "not_converged";
        case MetaStatus::degenerate: return "degenerate";
    }
    return "unknown";
}

void GilPelaezConfig::validate() const {
    if (!(abs_tol > 0.0 && abs_tol < 1e-2)) {
        throw std::domain_error("GilPelaezConfig: abs_tol must lie in (0, 1e-2)");
    }
    if (!(u_min > 0.0) || !(u_max_cap > u_min)) {
        throw std::domain_error("GilPelaezConfig: need 0 < u_min < u_max_cap");
    }
    if (max_panels == 0) {
        throw std::domain_error("GilPelaezConfig: max_panels must be positive");
    }
}

double gil_pelaez_integrand(const ModelParams& params, double eps, double u) {
    require_eps(eps);
    const double y0 = target_log(eps);
    return std::imag(std::exp(kJ * u * y0) * moment(params, kJ * u).value) / u;
}

double gil_pelaez_integrand_at_zero(const ModelParams& params, double eps) {
    require_eps(eps);
    return target_log(eps) - mean_log_loss(params);
}

MetaResult eta_gil_pelaez(const ModelParams& params, double eps, const GilPelaezConfig& cfg) {
    require_eps(eps);
    cfg.validate();
    if (cfg.shift_contour) {
        const double y0 = target_log(eps);
        if (y0 < mean_log_loss(params)) {
            double c = saddle_point(params, y0);
            const double log_prefactor = c * y0 + log_moment(params, c).real();
            // Classical form is accurate unless eta sits deep in the lower tail.
            if (log_prefactor < std::log(0.1)) {
                c = nudge_shift(c, params.delta());
                return eta_shifted(params, eps, c, cfg);
            }
        }
    }
    return eta_classical(params, eps, cfg);
}

BetaShape beta_shape(const ModelParams& params) {
    const double m1 = mean_success(params);
    const double m2 = moment(params, 2.0).value.real();
    const double var = m2 - m1 * m1;
    if (!(var > 1e-15)) {
        throw DegenerateVarianceError("beta_shape: variance of P_s is numerically zero");
    }
    return {m1, (m1 - m2) * (1.0 - m1) / var};
}

MetaResult eta_beta_approx(const ModelParams& params, double eps) {
    require_eps(eps);
    try {
        const BetaShape shape = beta_shape(params);
        const double y = shape.mean * shape.shape_beta / (1.0 - shape.mean);
        const double eta = 1.0 - specfun::reg_inc_beta(1.0 - eps, y, shape.shape_beta);
        return finish(params, eta, 0.0, MetaMethod::beta_approx, MetaStatus::ok, 0.0);
    } catch (const DegenerateVarianceError&) {
        const double ps = mean_success(params);
        const double eta = (1.0 - eps < ps) ? 1.0 : 0.0;
        return finish(params, eta, 0.0, MetaMethod::beta_approx, MetaStatus::degenerate, 0.0);
    }
}

MetaResult lambda_eps(const ModelParams& params, double eps, MetaMethod method,
                      const GilPelaezConfig& cfg) {
    switch (method) {
        case MetaMethod::gil_pelaez: return eta_gil_pelaez(params, eps, cfg);
        case MetaMethod::beta_approx: return eta_beta_approx(params, eps);
        case MetaMethod::monte_carlo: break;
    }
    throw std::invalid_argument("lambda_eps: method must be gil_pelaez or beta_approx");
}

}  // namespace soclab
