#include "soclab/socopt.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

#include "soclab/specfun.hpp"

namespace soclab {

namespace {

using std::numbers::pi;

constexpr double kMinP = 1e-3;
// The pattern search may leave the coarse grid upward by this many decades.
constexpr double kLambdaCapDecades = 3.0;

void require_common(double theta, double eps, double alpha) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw std::domain_error("eps must lie in (0, 1)");
    }
    if (!(theta > 0.0) || !std::isfinite(theta)) {
        throw std::domain_error("theta must be positive");
    }
    if (!(alpha > 2.0) || !std::isfinite(alpha)) {
        throw std::domain_error("alpha must exceed 2");
    }
}

double gamma_product(double delta) {
    return pi * delta / std::sin(pi * delta);
}

// Densities scale with 1/R^2 (fixed) or with mu (nearest receiver).
double density_scale(const LinkDistanceModel& link) {
    if (const auto* fixed = std::get_if<FixedDistance>(&link)) {
        return 1.0 / (fixed->r * fixed->r);
    }
    return std::get<RayleighNearest>(link).mu;
}

bool is_fixed(const LinkDistanceModel& link) {
    return std::holds_alternative<FixedDistance>(link);
}

double objective(const ModelParams& params, double eps, SocMethod method,
                 const GilPelaezConfig& cfg) {
    const MetaMethod meta =
        method == SocMethod::exact ? MetaMethod::gil_pelaez : MetaMethod::beta_approx;
    return lambda_eps(params, eps, meta, cfg).lambda_eps;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return out;
}

std::vector<double> p_grid(std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = 0.05 + 0.95 * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return out;
}

// Search coordinates: x = log(lambda p), y = log p. The ridge of constant
// lambda p that appears as p -> 0 is then axis aligned.
struct SearchPoint {
    double x;
    double y;
    double value;

    double lambda() const { return std::exp(x - y); }
    double p() const { return std::exp(y); }
};

struct SearchOutcome {
    SearchPoint best;
    bool converged;
    bool at_cap;
    std::size_t evaluations;
};

// Compass search with step halving. y is clamped to [log kMinP, 0] so that
// the boundary p = 1 is reached exactly.
SearchOutcome pattern_search(const std::function<double(double, double)>& f, SearchPoint start,
                             double step_x, double step_y, double log_lambda_cap,
                             const OptimizerConfig& cfg) {
    const double y_min = std::log(kMinP);
    SearchPoint best = start;
    std::size_t evals = 0;
    double hx = step_x;
    double hy = step_y;
    bool converged = false;
    for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
        if (hx < cfg.rel_step_tol && hy < cfg.rel_step_tol) {
            converged = true;
            break;
        }
        const SearchPoint candidates[4] = {
            {best.x + hx, best.y, 0.0},
            {best.x - hx, best.y, 0.0},
            {best.x, std::min(0.0, best.y + hy), 0.0},
            {best.x, std::max(y_min, best.y - hy), 0.0},
        };
        bool moved = false;
        SearchPoint next = best;
        for (const auto& c : candidates) {
            if ((c.x == best.x && c.y == best.y) || c.x - c.y > log_lambda_cap) {
                continue;
            }
            const double v = f(c.lambda(), c.p());
            ++evals;
            if (v > next.value) {
                next = {c.x, c.y, v};
                moved = true;
            }
        }
        if (moved) {
            best = next;
        } else {
            hx *= 0.5;
            hy *= 0.5;
        }
    }
    const bool at_cap = best.x - best.y + 2.0 * hx > log_lambda_cap;
    return {best, converged && !at_cap, at_cap, evals};
}

template <class Eval>
std::vector<double> grid_values(const ModelParams& base, const std::vector<double>& lambdas,
                                const std::vector<double>& ps, Eval&& eval, bool parallel) {
    const std::size_t n = lambdas.size() * ps.size();
    std::vector<double> out(n);
    const auto body = [&](std::size_t idx) {
        const double lambda = lambdas[idx / ps.size()];
        const double p = ps[idx % ps.size()];
        try {
            out[idx] = eval(base.with_lambda_p(lambda, p));
        } catch (const std::exception&) {
            out[idx] = std::numeric_limits<double>::quiet_NaN();
        }
    };
    if (parallel) {
        const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
        for (long long idx = 0; idx < count; ++idx) {
            body(static_cast<std::size_t>(idx));
        }
    } else {
        for (std::size_t idx = 0; idx < n; ++idx) {
            body(idx);
        }
    }
    return out;
}

// Grid search followed by pattern search for any objective of (lambda, p).
template <class Eval>
SearchOutcome maximize(const ModelParams& base, Eval&& eval, const OptimizerConfig& cfg) {
    if (cfg.lambda_points < 2 || cfg.p_points < 2) {
        throw std::domain_error("optimizer grids need at least two points");
    }
    const double unit = interference_constant(base.with_lambda_p(1.0, 1.0));
    const auto lambdas = log_grid(cfg.lambda_lo / unit, cfg.lambda_hi / unit, cfg.lambda_points);
    const auto ps = p_grid(cfg.p_points);
    const auto values = grid_values(base, lambdas, ps, eval, true);

    std::size_t best_idx = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best_idx] || std::isnan(values[best_idx])) {
            best_idx = i;
        }
    }
    const double lambda0 = lambdas[best_idx / ps.size()];
    const double p0 = ps[best_idx % ps.size()];
    SearchPoint start{std::log(lambda0 * p0), std::log(p0), values[best_idx]};
    if (std::isnan(start.value)) {
        throw std::runtime_error("optimizer: objective undefined on the whole grid");
    }
    const double step_x = std::log(lambdas[1] / lambdas[0]);
    const double step_p = std::log(ps[1] / ps[0]);
    const double cap = std::log(cfg.lambda_hi / unit) + kLambdaCapDecades * std::log(10.0);
    auto f = [&](double lambda, double p) {
        try {
            return eval(base.with_lambda_p(lambda, p));
        } catch (const std::exception&) {
            return -std::numeric_limits<double>::infinity();
        }
    };
    SearchOutcome out = pattern_search(f, start, step_x, step_p, cap, cfg);
    out.evaluations += values.size();
    return out;
}

ModelParams base_params(double theta, double alpha, const LinkDistanceModel& link) {
    return {1.0, 1.0, theta, alpha, link};
}

}  // namespace

std::string_view to_string(SocMethod method) {
    return method == SocMethod::exact ? "exact" : "beta_approx";
}

std::string_view to_string(BoundKind kind) {
    switch (kind) {
        case BoundKind::markov_upper: return "markov_upper";
        case BoundKind::tightest_markov: return "tightest_markov";
        case BoundKind::reverse_markov_lower: return "reverse_markov_lower";
        case BoundKind::asymptotic: return "asymptotic";
        case BoundKind::exact: return "exact";
    }
    return "unknown";
}

AsymptoticConstants AsymptoticConstants::make(double theta, double eps, double alpha) {
    require_common(theta, eps, alpha);
    const double delta = 2.0 / alpha;
    AsymptoticConstants c;
    c.kappa = delta / (1.0 - delta);
    c.c_geom = pi * gamma_product(delta);
    c.c_prime = pi * std::tgamma(1.0 - delta);
    c.rho = eps / theta;
    c.c_delta = std::pow(1.0 / delta, delta) * std::exp(-(1.0 - delta)) / std::tgamma(1.0 - delta);
    return c;
}

std::vector<double> soc_objective_grid_serial(const ModelParams& base, double eps, SocMethod method,
                                              const std::vector<double>& lambdas,
                                              const std::vector<double>& ps,
                                              const GilPelaezConfig& cfg) {
    return grid_values(
        base, lambdas, ps, [&](const ModelParams& m) { return objective(m, eps, method, cfg); },
        false);
}

std::vector<double> soc_objective_grid(const ModelParams& base, double eps, SocMethod method,
                                       const std::vector<double>& lambdas,
                                       const std::vector<double>& ps, const GilPelaezConfig& cfg) {
    return grid_values(
        base, lambdas, ps, [&](const ModelParams& m) { return objective(m, eps, method, cfg); },
        true);
}

SocResult soc_optimize(double theta, double eps, double alpha, const LinkDistanceModel& link,
                       SocMethod method, const OptimizerConfig& cfg) {
    require_common(theta, eps, alpha);
    const ModelParams base = base_params(theta, alpha, link);
    auto eval = [&](const ModelParams& m) { return objective(m, eps, method, cfg.gil_pelaez); };
    const SearchOutcome found = maximize(base, eval, cfg);

    SocResult out;
    out.lambda_star = found.best.lambda();
    out.p_star = found.best.p();
    out.method = method;
    out.converged = found.converged;
    out.evaluations = found.evaluations;
    const ModelParams at = base.with_lambda_p(out.lambda_star, out.p_star);
    const MetaMethod meta =
        method == SocMethod::exact ? MetaMethod::gil_pelaez : MetaMethod::beta_approx;
    const MetaResult r = lambda_eps(at, eps, meta, cfg.gil_pelaez);
    out.eta_star = r.eta;
    out.soc = r.lambda_eps;
    out.ps_star = mean_success(at);
    if (!r.ok()) {
        out.converged = false;
    }
    return out;
}

TransmissionCapacity transmission_capacity(double theta, double eps, double alpha) {
    require_common(theta, eps, alpha);
    const double lambda_p = ps_inverse(1.0 - eps, base_params(theta, alpha, FixedDistance{1.0}));
    return {(1.0 - eps) * lambda_p, lambda_p};
}

ConstrainedSoc constrained_soc(double nu, double theta, double eps, double alpha,
                               double equality_tol) {
    require_common(theta, eps, alpha);
    if (!(nu > 0.0)) {
        throw std::domain_error("constrained_soc: nu must be positive");
    }
    const double ps = mean_success(ModelParams(nu, 1.0, theta, alpha, FixedDistance{1.0}));
    const double gap = (1.0 - eps) - ps;
    if (std::abs(gap) <= equality_tol) {
        return {nu, true};
    }
    return {gap < 0.0 ? nu : 0.0, false};
}

double markov_upper(double b, double theta, double eps, double alpha, const LinkDistanceModel& link) {
    require_common(theta, eps, alpha);
    if (!(b > 0.0)) {
        throw std::domain_error("markov_upper: b must be positive");
    }
    const double delta = 2.0 / alpha;
    const double td = std::pow(theta, delta);
    // ln (1-eps)^-b
    const double tail = -b * std::log1p(-eps);
    double value = 0.0;
    if (b <= 1.0) {
        value = std::exp(tail) / (td * gamma_product(delta) * b);
    } else {
        value = std::exp(tail) / (td * std::tgamma(1.0 - delta) * specfun::gamma_ratio(b, delta));
    }
    if (is_fixed(link)) {
        value /= std::numbers::e * pi;
    }
    return value * density_scale(link);
}

double tightest_markov_upper(double theta, double eps, double alpha, const LinkDistanceModel& link,
                             TightestMode mode) {
    require_common(theta, eps, alpha);
    const double delta = 2.0 / alpha;
    const double y0 = -std::log1p(-eps);
    const bool fixed = is_fixed(link);
    if (mode == TightestMode::analytic) {
        const double td = std::pow(theta, delta);
        double value = 0.0;
        if (1.0 / y0 <= 1.0) {
            value = y0 / (td * gamma_product(delta));
            value *= fixed ? 1.0 / pi : std::numbers::e;
        } else {
            const double common =
                std::pow(y0 / theta, delta) / (std::pow(delta, delta) * std::tgamma(1.0 - delta));
            value = fixed ? common * std::exp(-(1.0 - delta)) / pi : common * std::exp(delta);
        }
        return value * density_scale(link);
    }
    // Minimize over log b; the bound is unimodal in b with a kink at b = 1,
    // where brent only gets within its bracket tolerance.
    auto f = [&](double log_b) { return markov_upper(std::exp(log_b), theta, eps, alpha, link); };
    const double lo = std::log(1e-6);
    const double hi = std::log(100.0 * (1.0 + 1.0 / y0));
    const auto best = boost::math::tools::brent_find_minima(f, lo, hi, 28);
    return std::min(best.second, f(0.0));
}

LowerBound reverse_markov_lower(int b, double theta, double eps, double alpha,
                                const LinkDistanceModel& link, const OptimizerConfig& cfg) {
    require_common(theta, eps, alpha);
    if (b < 1) {
        throw std::domain_error("reverse_markov_lower: b must be a positive integer");
    }
    const double delta = 2.0 / alpha;
    const double denom = std::pow(theta, delta) * gamma_product(delta);
    const double scale = density_scale(link);
    if (b == 1) {
        if (is_fixed(link)) {
            const double w = specfun::lambert_w0((1.0 - eps) * std::numbers::e);
            const double value = (1.0 - w) / (pi * denom) * (std::exp(-(1.0 - w)) - (1.0 - eps)) / eps;
            // maximizer t = lambda p of t (1 - (1 - e^{-t C theta^delta}) / eps)
            const double t = (1.0 - w) / (pi * denom);
            return {value * scale, t * scale, 1.0, true};
        }
        const double root = std::sqrt(1.0 - eps);
        const double value = (1.0 - root) * (1.0 - root) / (eps * denom);
        const double t = (1.0 / root - 1.0) / denom;
        return {value * scale, t * scale, 1.0, true};
    }
    const ModelParams base = base_params(theta, alpha, link);
    const double eps_b = std::pow(eps, b);
    auto eval = [&](const ModelParams& m) {
        // E[(1 - P_s)^b] from the integer moments
        double sum = 0.0;
        double binom = 1.0;
        for (int k = 0; k <= b; ++k) {
            const double mk = k == 0 ? 1.0 : moment(m, static_cast<double>(k)).value.real();
            sum += ((k % 2 == 0) ? binom : -binom) * mk;
            binom *= static_cast<double>(b - k) / static_cast<double>(k + 1);
        }
        return m.lambda() * m.p() * (1.0 - sum / eps_b);
    };
    const SearchOutcome found = maximize(base, eval, cfg);
    return {std::max(0.0, found.best.value), found.best.lambda(), found.best.p(), found.converged};
}

double lambda_eps_asymptotic(const ModelParams& params, double eps) {
    require_common(params.theta(), eps, params.alpha());
    const double delta = params.delta();
    const double p = params.p();
    if (params.link_kind() == LinkKind::fixed) {
        const ModelParams unit = normalize_scale(params);
        const double lambda = unit.lambda();
        const double kappa = delta / (1.0 - delta);
        const double c_prime = pi * std::tgamma(1.0 - delta);
        const double expo = std::pow(params.theta() * p / eps, kappa) *
                            std::pow(delta * lambda * c_prime, kappa / delta) / kappa;
        return params.lambda() * p * std::exp(-expo);
    }
    const double mu = std::get<RayleighNearest>(params.link()).mu;
    return mu * std::pow(eps, delta) * std::pow(p, 1.0 - delta) /
           (std::pow(params.theta(), delta) * gamma_product(delta));
}

SocAsymptote soc_asymptotic(double theta, double eps, double alpha, const LinkDistanceModel& link) {
    require_common(theta, eps, alpha);
    const double delta = 2.0 / alpha;
    const double rho_delta = std::pow(eps / theta, delta);
    const double scale = density_scale(link);
    SocAsymptote out;
    if (is_fixed(link)) {
        const double lambda_opt = rho_delta / (pi * std::pow(delta, delta) * std::tgamma(1.0 - delta));
        out.eta_opt = std::exp(-(1.0 - delta));
        out.lambda_opt = lambda_opt * scale;
        out.soc = lambda_opt * out.eta_opt * scale;
        out.ps_opt = 1.0 - std::pow(eps / delta, delta) * std::tgamma(1.0 + delta);
        return out;
    }
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    out.soc = rho_delta / gamma_product(delta) * scale;
    out.lambda_opt = nan;
    out.eta_opt = nan;
    out.ps_opt = nan;
    return out;
}

}  // namespace soclab
