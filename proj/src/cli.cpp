#include "soclab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "soclab/metadist.hpp"
#include "soclab/netmodel.hpp"
#include "soclab/simcore.hpp"
#include "soclab/socopt.hpp"

#ifndef SOCLAB_VERSION
#define SOCLAB_VERSION "0.0.0"
#endif

namespace soclab::cli {

namespace {

class UsageError : public std::runtime_error {
public:
    UsageError(const std::string& flag, const std::string& what)
        : std::runtime_error(flag + ": " + what) {}
};

// Every option of every subcommand; each subcommand registers the subset it uses.
struct Options {
    std::string preset;
    double theta_db = -10.0;
    double theta = 0.1;
    double alpha = 4.0;
    std::string link = "fixed";
    double r = 1.0;
    double mu = 1.0;
    std::string lambda;
    std::string nu;
    std::string p = "1";
    std::string eps = "0.1";
    std::string b = "1,2";
    std::string method;
    std::string kind = "soc";
    std::size_t realizations = 40;
    double window = 30.0;
    std::size_t bins = 50;
    std::string boundary = "torus";
    double guard = 0.0;
    std::uint64_t seed = 0;
    bool json = false;
    std::string out;
};

struct Registry {
    std::map<std::string, CLI::Option*> opts;

    bool given(const std::string& name) const {
        const auto it = opts.find(name);
        return it != opts.end() && it->second->count() > 0;
    }
};

// Values a preset pins unless the user overrides them on the command line.
struct Preset {
    std::string subcommand;
    std::vector<std::pair<std::string, std::string>> values;
};

const std::map<std::string, Preset>& presets() {
    static const std::map<std::string, Preset> table = {
        {"fig1", {"simulate", {{"theta-db", "-10"}, {"alpha", "4"}, {"link", "fixed"},
                               {"nu", "1/3"}, {"p", "1"}, {"bins", "50"}, {"realizations", "40"},
                               {"window", "30"}}}},
        {"fig2", {"lambda-eps", {{"theta-db", "-10"}, {"alpha", "4"}, {"link", "fixed"},
                                 {"nu", "0.1"}, {"p", "0.01:1:100"},
                                 {"eps", "0.05,0.1,0.15,0.2,0.25,0.3"}, {"method", "gil-pelaez"}}}},
        {"fig3", {"lambda-eps", {{"theta-db", "-10"}, {"alpha", "4"}, {"link", "fixed"},
                                 {"nu", "log:0.001:1:61"}, {"p", "0.1,0.2,0.5,1"}, {"eps", "0.1"},
                                 {"method", "gil-pelaez"}}}},
        {"fig4", {"lambda-eps", {{"theta-db", "-10"}, {"alpha", "4"}, {"link", "fixed"},
                                 {"lambda", "0.02:1:50"}, {"p", "0.02:1:50"}, {"eps", "0.1"},
                                 {"method", "gil-pelaez"}}}},
        {"fig5", {"lambda-eps", {{"theta-db", "-10"}, {"alpha", "4"}, {"link", "fixed"},
                                 {"lambda", "0.02:1:50"}, {"p", "0.02:1:50"}, {"eps", "0.1"},
                                 {"method", "gil-pelaez"}}}},
        {"fig6", {"asymptotic", {{"kind", "diversity"}, {"alpha", "4"}, {"b", "log:1:1000:61"},
                                 {"p", "0.25,0.5,1"}}}},
        {"fig7", {"bounds", {{"theta-db", "-10"}, {"alpha", "4"}, {"link", "fixed"},
                             {"eps", "0.01:0.99:50"}, {"method", "beta"}}}},
        {"fig8", {"lambda-eps", {{"theta-db", "0"}, {"alpha", "4"}, {"link", "fixed"},
                                 {"lambda", "0.5"}, {"p", "1/3"}, {"eps", "log:0.001:0.5:40"},
                                 {"method", "gil-pelaez,beta"}}}},
        {"fig9", {"lambda-eps", {{"theta-db", "-10"}, {"alpha", "4"}, {"link", "fixed"},
                                 {"lambda", "0.005:0.2:40"}, {"p", "0.025:1:40"}, {"eps", "0.007"},
                                 {"method", "gil-pelaez"}}}},
        {"fig10", {"bounds", {{"theta-db", "-10"}, {"alpha", "4"}, {"link", "rayleigh"},
                              {"eps", "0.01:0.99:50"}, {"method", "beta"}}}},
    };
    return table;
}

double parse_number(const std::string& text) {
    const auto slash = text.find('/');
    try {
        std::size_t used = 0;
        if (slash != std::string::npos) {
            const std::string num = text.substr(0, slash);
            const std::string den = text.substr(slash + 1);
            std::size_t used_den = 0;
            const double a = std::stod(num, &used);
            const double b = std::stod(den, &used_den);
            if (used != num.size() || used_den != den.size()) {
                throw std::invalid_argument(text);
            }
            return a / b;
        }
        const double v = std::stod(text, &used);
        if (used != text.size()) {
            throw std::invalid_argument(text);
        }
        return v;
    } catch (const std::logic_error&) {
        throw std::invalid_argument("not a number: '" + text + "'");
    }
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, sep)) {
        parts.push_back(cur);
    }
    return parts;
}

// Grid values checked against an open/closed interval; errors name the flag.
std::vector<double> grid_option(const std::string& flag, const std::string& spec, double lo,
                                double hi, bool lo_open, bool hi_open, const std::string& range) {
    std::vector<double> values;
    try {
        values = parse_grid(spec);
    } catch (const std::invalid_argument& e) {
        throw UsageError(flag, e.what());
    }
    for (double v : values) {
        const bool below = lo_open ? !(v > lo) : !(v >= lo);
        const bool above = hi_open ? !(v < hi) : !(v <= hi);
        if (below || above || !std::isfinite(v)) {
            throw UsageError(flag, "value " + format_number(v) + " outside valid range " + range);
        }
    }
    return values;
}

std::vector<std::string> methods_option(const std::string& spec,
                                        const std::vector<std::string>& allowed) {
    auto names = split(spec, ',');
    if (names.empty()) {
        throw UsageError("--method", "empty method list");
    }
    for (const auto& n : names) {
        if (std::find(allowed.begin(), allowed.end(), n) == allowed.end()) {
            std::string valid;
            for (const auto& a : allowed) {
                valid += (valid.empty() ? "" : "|") + a;
            }
            throw UsageError("--method", "unknown method '" + n + "', expected " + valid);
        }
    }
    return names;
}

struct Context {
    Options opt;
    Registry reg;
    RunManifest manifest;

    void record(const std::string& key, const std::string& value) {
        manifest.params.emplace_back(key, value);
    }
    void record(const std::string& key, double value) { record(key, format_number(value)); }

    double theta() const { return reg.given("theta") ? opt.theta : std::pow(10.0, opt.theta_db / 10.0); }

    LinkDistanceModel link() const {
        if (opt.link == "fixed") {
            return FixedDistance{opt.r};
        }
        return RayleighNearest{opt.mu};
    }

    void record_model() {
        record("theta", theta());
        record("alpha", opt.alpha);
        record("link", opt.link);
        if (opt.link == "fixed") {
            record("R", opt.r);
        } else {
            record("mu", opt.mu);
        }
    }

    std::vector<double> eps_grid() {
        auto g = grid_option("--eps", opt.eps, 0.0, 1.0, true, true, "(0, 1)");
        record("eps", opt.eps);
        return g;
    }

    std::vector<double> p_grid() {
        auto g = grid_option("--p", opt.p, 0.0, 1.0, true, false, "(0, 1]");
        record("p", opt.p);
        return g;
    }

    // Either --lambda or --nu (= lambda p) selects the density axis.
    std::pair<std::vector<double>, bool> density_grid() {
        const bool has_lambda = !opt.lambda.empty();
        const bool has_nu = !opt.nu.empty();
        if (has_lambda == has_nu) {
            throw UsageError("--lambda/--nu", "exactly one of --lambda or --nu is required");
        }
        const std::string flag = has_lambda ? "--lambda" : "--nu";
        const std::string& spec = has_lambda ? opt.lambda : opt.nu;
        auto g = grid_option(flag, spec, 0.0, HUGE_VAL, true, true, "(0, inf)");
        record(has_lambda ? "lambda" : "nu", spec);
        return {g, has_nu};
    }
};

void add_model_options(CLI::App* sub, Context& ctx) {
    auto& o = ctx.opt;
    auto& r = ctx.reg.opts;
    r["theta-db"] = sub->add_option("--theta-db", o.theta_db, "SIR threshold in dB (default -10)");
    r["theta"] = sub->add_option("--theta", o.theta, "SIR threshold, linear (> 0)")
                     ->check(CLI::PositiveNumber);
    r["theta"]->excludes(r["theta-db"]);
    r["alpha"] = sub->add_option("--alpha", o.alpha, "path-loss exponent (> 2)")
                     ->check(CLI::Validator(
                         [](std::string& v) {
                             return parse_number(v) > 2.0 ? std::string{}
                                                          : "must lie in (2, inf)";
                         },
                         "(2, inf)"));
    r["link"] = sub->add_option("--link", o.link, "link-distance model")
                    ->check(CLI::IsMember({"fixed", "rayleigh"}));
    r["R"] = sub->add_option("--R", o.r, "fixed link distance (> 0)")->check(CLI::PositiveNumber);
    r["mu"] = sub->add_option("--mu", o.mu, "receiver density for rayleigh links (> 0)")
                  ->check(CLI::PositiveNumber);
}

void add_output_options(CLI::App* sub, Context& ctx) {
    auto& o = ctx.opt;
    auto& r = ctx.reg.opts;
    r["json"] = sub->add_flag("--json", o.json, "emit JSON instead of CSV");
    r["out"] = sub->add_option("--out", o.out, "output path (default stdout)");
    r["preset"] = sub->add_option("--preset", o.preset, "figure preset fig1..fig10");
}

std::string warning_text(MetaStatus status) {
    return status == MetaStatus::ok || status == MetaStatus::degenerate
               ? std::string{}
               : "eta " + std::string(to_string(status));
}

MetaMethod meta_method(const std::string& name) {
    if (name == "gil-pelaez") {
        return MetaMethod::gil_pelaez;
    }
    if (name == "beta") {
        return MetaMethod::beta_approx;
    }
    return MetaMethod::monte_carlo;
}

// ---- subcommands ---------------------------------------------------------

Table cmd_eval(Context& ctx) {
    ctx.record_model();
    const auto [density, is_nu] = ctx.density_grid();
    const auto ps = ctx.p_grid();
    const auto bs = grid_option("--b", ctx.opt.b, 0.0, HUGE_VAL, true, true, "(0, inf)");
    ctx.record("b", ctx.opt.b);
    Table t;
    t.columns = {"lambda", "p", "b", "moment", "mean_success", "variance"};
    for (double p : ps) {
        for (double d : density) {
            const double lambda = is_nu ? d / p : d;
            const ModelParams m(lambda, p, ctx.theta(), ctx.opt.alpha, ctx.link());
            for (double b : bs) {
                t.rows.push_back({lambda, p, b, moment(m, b).value.real(), mean_success(m),
                                  variance_ps(m)});
            }
        }
    }
    return t;
}

Table cmd_meta(Context& ctx) {
    ctx.record_model();
    const auto [density, is_nu] = ctx.density_grid();
    const auto ps = ctx.p_grid();
    const auto epss = ctx.eps_grid();
    if (ctx.opt.method.empty()) {
        ctx.opt.method = "gil-pelaez";
    }
    const auto methods = methods_option(ctx.opt.method, {"gil-pelaez", "beta", "mc"});
    ctx.record("method", ctx.opt.method);
    const bool uses_mc = std::find(methods.begin(), methods.end(), "mc") != methods.end();
    if (uses_mc) {
        ctx.record("realizations", std::to_string(ctx.opt.realizations));
        ctx.record("window", ctx.opt.window);
        ctx.record("boundary", ctx.opt.boundary);
        ctx.record("guard", ctx.opt.guard);
    }
    Table t;
    t.columns = {"lambda", "p", "eps", "method", "eta", "lambda_eps", "std_err", "warning"};
    for (double p : ps) {
        for (double d : density) {
            const double lambda = is_nu ? d / p : d;
            const ModelParams m(lambda, p, ctx.theta(), ctx.opt.alpha, ctx.link());
            std::optional<sim::EmpiricalDistribution> dist;
            if (uses_mc) {
                sim::SimConfig cfg{m, ctx.opt.window, ctx.opt.seed, ctx.opt.realizations,
                                   {ctx.opt.boundary == "guard" ? sim::BoundaryKind::guard
                                                                : sim::BoundaryKind::torus,
                                    ctx.opt.guard}};
                try {
                    cfg.validate();
                } catch (const std::domain_error& e) {
                    throw UsageError("--window/--guard", e.what());
                }
                dist = sim::simulate(cfg);
            }
            for (double eps : epss) {
                for (const auto& name : methods) {
                    std::string warn;
                    double eta = 0.0;
                    double se = 0.0;
                    if (name == "mc") {
                        const auto est = sim::empirical_meta(*dist, eps);
                        eta = est.value;
                        se = est.std_err;
                    } else {
                        const auto r = lambda_eps(m, eps, meta_method(name));
                        eta = r.eta;
                        se = r.err_estimate;
                        warn = warning_text(r.status);
                    }
                    t.warning = t.warning || !warn.empty();
                    t.rows.push_back({lambda, p, eps, name, eta, lambda * p * eta, se, warn});
                }
            }
        }
    }
    return t;
}

Table cmd_lambda_eps(Context& ctx) {
    ctx.record_model();
    const auto [density, is_nu] = ctx.density_grid();
    const auto ps = ctx.p_grid();
    const auto epss = ctx.eps_grid();
    if (ctx.opt.method.empty()) {
        ctx.opt.method = "gil-pelaez";
    }
    const auto methods = methods_option(ctx.opt.method, {"gil-pelaez", "beta"});
    ctx.record("method", ctx.opt.method);

    struct Point {
        double eps;
        double lambda;
        double p;
        std::string method;
    };
    std::vector<Point> points;
    for (double eps : epss) {
        for (double p : ps) {
            for (double d : density) {
                for (const auto& name : methods) {
                    points.push_back({eps, is_nu ? d / p : d, p, name});
                }
            }
        }
    }
    std::vector<std::vector<Cell>> rows(points.size());
    std::vector<std::string> errors(points.size());
    const auto count = static_cast<long long>(points.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < count; ++i) {
        const Point& pt = points[static_cast<std::size_t>(i)];
        try {
            const ModelParams m(pt.lambda, pt.p, ctx.theta(), ctx.opt.alpha, ctx.link());
            const auto r = lambda_eps(m, pt.eps, meta_method(pt.method));
            rows[static_cast<std::size_t>(i)] = {pt.eps, pt.lambda, pt.p, pt.lambda * pt.p,
                                                 pt.method, r.eta, r.lambda_eps,
                                                 lambda_eps_asymptotic(m, pt.eps),
                                                 mean_success(m), warning_text(r.status)};
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) {
            throw std::runtime_error(e);
        }
    }
    Table t;
    t.columns = {"eps", "lambda", "p", "lambda_p", "method", "eta", "lambda_eps",
                 "lambda_eps_asymptotic", "mean_success", "warning"};
    for (auto& row : rows) {
        t.warning = t.warning || !std::get<std::string>(row.back()).empty();
        t.rows.push_back(std::move(row));
    }
    return t;
}

SocMethod soc_method(Context& ctx, const std::string& fallback) {
    if (ctx.opt.method.empty()) {
        ctx.opt.method = fallback;
    }
    const auto names = methods_option(ctx.opt.method, {"exact", "beta"});
    if (names.size() != 1) {
        throw UsageError("--method", "exactly one of exact|beta");
    }
    ctx.record("method", ctx.opt.method);
    return names.front() == "exact" ? SocMethod::exact : SocMethod::beta_approx;
}

Table cmd_soc(Context& ctx) {
    ctx.record_model();
    const auto epss = ctx.eps_grid();
    const SocMethod method = soc_method(ctx, "exact");
    Table t;
    t.columns = {"eps", "soc", "lambda_star", "p_star", "eta_star", "ps_star", "method",
                 "converged", "warning"};
    for (double eps : epss) {
        const auto r = soc_optimize(ctx.theta(), eps, ctx.opt.alpha, ctx.link(), method);
        const std::string warn = r.converged ? "" : "optimizer not converged";
        t.warning = t.warning || !r.converged;
        t.rows.push_back({eps, r.soc, r.lambda_star, r.p_star, r.eta_star, r.ps_star,
                          std::string(to_string(method)), r.converged ? 1.0 : 0.0, warn});
    }
    return t;
}

Table cmd_bounds(Context& ctx) {
    ctx.record_model();
    const auto epss = ctx.eps_grid();
    const SocMethod method = soc_method(ctx, "beta");
    const double theta = ctx.theta();
    const double alpha = ctx.opt.alpha;
    const auto link = ctx.link();
    Table t;
    t.columns = {"eps", "soc", "markov_b1", "markov_b2", "markov_b4", "tightest_analytic",
                 "tightest_numeric", "lower_b1", "lower_b2", "lower_b4", "asymptotic", "warning"};
    for (double eps : epss) {
        const auto s = soc_optimize(theta, eps, alpha, link, method);
        const auto l2 = reverse_markov_lower(2, theta, eps, alpha, link);
        const auto l4 = reverse_markov_lower(4, theta, eps, alpha, link);
        std::string warn;
        if (!s.converged || !l2.converged || !l4.converged) {
            warn = "optimizer not converged";
            t.warning = true;
        }
        t.rows.push_back({eps, s.soc, markov_upper(1, theta, eps, alpha, link),
                          markov_upper(2, theta, eps, alpha, link),
                          markov_upper(4, theta, eps, alpha, link),
                          tightest_markov_upper(theta, eps, alpha, link, TightestMode::analytic),
                          tightest_markov_upper(theta, eps, alpha, link, TightestMode::numeric),
                          reverse_markov_lower(1, theta, eps, alpha, link).value, l2.value, l4.value,
                          soc_asymptotic(theta, eps, alpha, link).soc, warn});
    }
    return t;
}

Table cmd_asymptotic(Context& ctx) {
    const std::string kind = ctx.opt.kind;
    ctx.record("kind", kind);
    Table t;
    if (kind == "diversity") {
        ctx.record("alpha", ctx.opt.alpha);
        const auto ps = ctx.p_grid();
        const auto bs = grid_option("--b", ctx.opt.b, 0.0, HUGE_VAL, true, true, "(0, inf)");
        ctx.record("b", ctx.opt.b);
        const double delta = 2.0 / ctx.opt.alpha;
        t.columns = {"p", "b", "diversity_exact", "diversity_asymptotic", "ratio"};
        for (double p : ps) {
            for (double b : bs) {
                const double exact = diversity_poly(b, p, delta).real();
                const double asym = diversity_poly_asymptotic(b, p, delta);
                t.rows.push_back({p, b, exact, asym, exact / asym});
            }
        }
        return t;
    }
    ctx.record_model();
    const auto epss = ctx.eps_grid();
    if (kind == "lambda-eps") {
        const auto [density, is_nu] = ctx.density_grid();
        const auto ps = ctx.p_grid();
        t.columns = {"eps", "lambda", "p", "lambda_eps_asymptotic"};
        for (double eps : epss) {
            for (double p : ps) {
                for (double d : density) {
                    const double lambda = is_nu ? d / p : d;
                    const ModelParams m(lambda, p, ctx.theta(), ctx.opt.alpha, ctx.link());
                    t.rows.push_back({eps, lambda, p, lambda_eps_asymptotic(m, eps)});
                }
            }
        }
        return t;
    }
    const auto c = AsymptoticConstants::make(ctx.theta(), epss.front(), ctx.opt.alpha);
    t.columns = {"eps", "soc", "lambda_opt", "eta_opt", "ps_opt", "p_opt", "kappa", "c_delta"};
    for (double eps : epss) {
        const auto a = soc_asymptotic(ctx.theta(), eps, ctx.opt.alpha, ctx.link());
        t.rows.push_back({eps, a.soc, a.lambda_opt, a.eta_opt, a.ps_opt, a.p_opt, c.kappa, c.c_delta});
    }
    return t;
}

Table cmd_simulate(Context& ctx) {
    ctx.record_model();
    const auto [density, is_nu] = ctx.density_grid();
    const auto ps = ctx.p_grid();
    if (density.size() != 1 || ps.size() != 1) {
        throw UsageError("--lambda/--nu/--p", "simulate takes a single parameter point");
    }
    const double p = ps.front();
    const double lambda = is_nu ? density.front() / p : density.front();
    ctx.record("realizations", std::to_string(ctx.opt.realizations));
    ctx.record("window", ctx.opt.window);
    ctx.record("boundary", ctx.opt.boundary);
    ctx.record("guard", ctx.opt.guard);
    ctx.record("bins", std::to_string(ctx.opt.bins));
    const ModelParams m(lambda, p, ctx.theta(), ctx.opt.alpha, ctx.link());
    sim::SimConfig cfg{m, ctx.opt.window, ctx.opt.seed, ctx.opt.realizations,
                       {ctx.opt.boundary == "guard" ? sim::BoundaryKind::guard
                                                    : sim::BoundaryKind::torus,
                        ctx.opt.guard}};
    try {
        cfg.validate();
    } catch (const std::domain_error& e) {
        throw UsageError("--window/--guard", e.what());
    }
    const auto dist = sim::simulate(cfg);
    if (dist.num_links() == 0) {
        throw UsageError("--lambda/--window", "no links were drawn");
    }
    const auto counts = sim::histogram(dist, ctx.opt.bins);
    double mean = 0.0;
    double se = 0.0;
    std::string warn;
    try {
        const auto est = sim::empirical_moment(dist, 1.0);
        mean = est.value;
        se = est.std_err;
    } catch (const sim::InsufficientSamplesError& e) {
        warn = "fewer than 100 links";
    }
    Table t;
    t.warning = !warn.empty();
    t.columns = {"bin_lo", "bin_hi", "count", "density", "mean", "mean_std_err", "links", "warning"};
    const double width = 1.0 / static_cast<double>(ctx.opt.bins);
    const double n = static_cast<double>(dist.num_links());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double c = static_cast<double>(counts[k]);
        t.rows.push_back({static_cast<double>(k) * width, static_cast<double>(k + 1) * width, c,
                          c / (n * width), mean, se, n, warn});
    }
    return t;
}

Table cmd_compare_tc(Context& ctx) {
    ctx.opt.link = "fixed";
    ctx.opt.r = 1.0;
    ctx.record_model();
    const auto epss = ctx.eps_grid();
    const SocMethod method = soc_method(ctx, "exact");
    Table t;
    t.columns = {"eps", "tc", "lambda_p_tc", "ps_at_tc", "eta_at_tc", "lambda_eps_at_tc", "soc",
                 "lambda_star", "p_star", "soc_over_tc", "warning"};
    for (double eps : epss) {
        const auto tc = transmission_capacity(ctx.theta(), eps, ctx.opt.alpha);
        const ModelParams at(tc.lambda_p, 1.0, ctx.theta(), ctx.opt.alpha, FixedDistance{1.0});
        const auto meta = lambda_eps(at, eps, method == SocMethod::exact ? MetaMethod::gil_pelaez
                                                                        : MetaMethod::beta_approx);
        const auto s = soc_optimize(ctx.theta(), eps, ctx.opt.alpha, FixedDistance{1.0}, method);
        std::string warn = warning_text(meta.status);
        if (!s.converged) {
            warn += (warn.empty() ? "" : "; ") + std::string("optimizer not converged");
        }
        t.warning = t.warning || !warn.empty();
        t.rows.push_back({eps, tc.tc, tc.lambda_p, mean_success(at), meta.eta, meta.lambda_eps,
                          s.soc, s.lambda_star, s.p_star, s.soc / tc.tc, warn});
    }
    return t;
}

void apply_preset(Context& ctx, const std::string& subcommand) {
    if (ctx.opt.preset.empty()) {
        return;
    }
    const auto it = presets().find(ctx.opt.preset);
    if (it == presets().end()) {
        throw UsageError("--preset", "unknown preset '" + ctx.opt.preset + "', expected fig1..fig10");
    }
    if (it->second.subcommand != subcommand) {
        throw UsageError("--preset", ctx.opt.preset + " belongs to subcommand '" +
                                         it->second.subcommand + "'");
    }
    auto& o = ctx.opt;
    for (const auto& [key, value] : it->second.values) {
        if (ctx.reg.given(key)) {
            continue;
        }
        if (key == "theta-db") {
            if (!ctx.reg.given("theta")) {
                o.theta_db = parse_number(value);
            }
        } else if (key == "alpha") {
            o.alpha = parse_number(value);
        } else if (key == "link") {
            o.link = value;
        } else if (key == "lambda") {
            if (!ctx.reg.given("nu")) {
                o.lambda = value;
            }
        } else if (key == "nu") {
            if (!ctx.reg.given("lambda")) {
                o.nu = value;
            }
        } else if (key == "p") {
            o.p = value;
        } else if (key == "eps") {
            o.eps = value;
        } else if (key == "b") {
            o.b = value;
        } else if (key == "method") {
            o.method = value;
        } else if (key == "kind") {
            o.kind = value;
        } else if (key == "bins") {
            o.bins = static_cast<std::size_t>(parse_number(value));
        } else if (key == "realizations") {
            o.realizations = static_cast<std::size_t>(parse_number(value));
        } else if (key == "window") {
            o.window = parse_number(value);
        }
    }
    ctx.record("preset", ctx.opt.preset);
}

void configure_threads(std::ostream& err) {
    const char* env = std::getenv("SOC_LAB_THREADS");
    if (env == nullptr || *env == '\0') {
        return;
    }
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1) {
        throw UsageError("SOC_LAB_THREADS", std::string("expected a positive integer, got '") + env + "'");
    }
    omp_set_num_threads(static_cast<int>(n));
    err << "threads: " << n << "\n";
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", value == 0.0 ? 0.0 : value);
    return buf;
}

std::string fnv1a64(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<double> parse_grid(const std::string& spec) {
    if (spec.empty()) {
        throw std::invalid_argument("empty grid");
    }
    auto parts = split(spec, ':');
    const bool log_scale = !parts.empty() && parts.front() == "log";
    if (log_scale) {
        parts.erase(parts.begin());
    }
    if (parts.size() == 3) {
        const double a = parse_number(parts[0]);
        const double b = parse_number(parts[1]);
        const double n_raw = parse_number(parts[2]);
        if (!(n_raw >= 2.0) || n_raw != std::floor(n_raw) || !(b > a)) {
            throw std::invalid_argument("grid '" + spec + "' needs a < b and an integer count >= 2");
        }
        if (log_scale && !(a > 0.0)) {
            throw std::invalid_argument("log grid '" + spec + "' needs positive bounds");
        }
        const auto n = static_cast<std::size_t>(n_raw);
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(n - 1);
            out[i] = log_scale ? std::exp(std::log(a) + t * (std::log(b) - std::log(a)))
                               : a + t * (b - a);
        }
        out.back() = b;
        return out;
    }
    if (log_scale || parts.size() != 1) {
        throw std::invalid_argument("malformed grid '" + spec + "'");
    }
    std::vector<double> out;
    for (const auto& item : split(spec, ',')) {
        out.push_back(parse_number(item));
    }
    return out;
}

std::string render_csv(const RunManifest& manifest, const Table& table) {
    std::ostringstream data;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        data << (i ? "," : "") << table.columns[i];
    }
    data << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            data << (i ? "," : "");
            if (const auto* v = std::get_if<double>(&row[i])) {
                data << format_number(*v);
            } else {
                data << std::get<std::string>(row[i]);
            }
        }
        data << "\n";
    }
    const std::string body = data.str();
    std::ostringstream out;
    out << "# command: " << manifest.command << "\n";
    out << "# version: " << manifest.version << "\n";
    out << "# seed: " << manifest.seed << "\n";
    for (const auto& [k, v] : manifest.params) {
        out << "# param: " << k << "=" << v << "\n";
    }
    out << "# checksum: fnv1a64:" << fnv1a64(body) << "\n";
    out << body;
    return out.str();
}

std::string render_json(const RunManifest& manifest, const Table& table) {
    using nlohmann::ordered_json;
    ordered_json params = ordered_json::object();
    for (const auto& [k, v] : manifest.params) {
        params[k] = v;
    }
    ordered_json rows = ordered_json::array();
    for (const auto& row : table.rows) {
        ordered_json r = ordered_json::array();
        for (const auto& cell : row) {
            if (const auto* v = std::get_if<double>(&cell)) {
                // same digits as the CSV, so both formats carry identical values
                if (std::isfinite(*v)) {
                    r.push_back(std::strtod(format_number(*v).c_str(), nullptr));
                } else {
                    r.push_back(nullptr);
                }
            } else {
                r.push_back(std::get<std::string>(cell));
            }
        }
        rows.push_back(std::move(r));
    }
    ordered_json doc;
    doc["manifest"] = {{"command", manifest.command},
                       {"version", manifest.version},
                       {"seed", manifest.seed},
                       {"params", params},
                       {"checksum", "fnv1a64:" + manifest.checksum}};
    doc["columns"] = table.columns;
    doc["rows"] = rows;
    return doc.dump(2) + "\n";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Context ctx;
    auto& o = ctx.opt;
    CLI::App app{"Spatial outage capacity of Poisson bipolar networks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", SOCLAB_VERSION);

    auto* eval = app.add_subcommand("eval", "mean success probability, moments, variance");
    auto* meta = app.add_subcommand("meta", "meta distribution eta(theta, eps)");
    auto* leps = app.add_subcommand("lambda-eps", "density of reliable links over a sweep");
    auto* soc = app.add_subcommand("soc", "spatial outage capacity by optimization");
    auto* bounds = app.add_subcommand("bounds", "Markov bounds and asymptote against eps");
    auto* asym = app.add_subcommand("asymptotic", "high-reliability closed forms");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo histogram of P_s");
    auto* tc = app.add_subcommand("compare-tc", "transmission capacity against the SOC");

    auto& r = ctx.reg.opts;
    for (auto* sub : {eval, meta, leps, soc, bounds, asym, simulate, tc}) {
        add_model_options(sub, ctx);
        add_output_options(sub, ctx);
    }
    for (auto* sub : {eval, meta, leps, simulate, asym}) {
        r["lambda"] = sub->add_option("--lambda", o.lambda, "transmitter density grid");
        r["nu"] = sub->add_option("--nu", o.nu, "active density lambda*p grid");
        r["p"] = sub->add_option("--p", o.p, "transmit probability grid in (0, 1]");
    }
    for (auto* sub : {meta, leps, soc, bounds, asym, tc}) {
        r["eps"] = sub->add_option("--eps,--eps-grid", o.eps, "outage target grid in (0, 1)");
    }
    for (auto* sub : {meta, leps, soc, bounds, tc}) {
        r["method"] = sub->add_option("--method", o.method, "evaluation method(s)");
    }
    for (auto* sub : {eval, asym}) {
        r["b"] = sub->add_option("--b", o.b, "moment order grid");
    }
    r["kind"] = asym->add_option("--kind", o.kind, "soc | lambda-eps | diversity")
                    ->check(CLI::IsMember({"soc", "lambda-eps", "diversity"}));
    for (auto* sub : {meta, simulate}) {
        r["realizations"] = sub->add_option("--realizations", o.realizations, "network realizations (>= 1)")
                                ->check(CLI::Range(std::size_t{1}, std::size_t{100000000}));
        r["window"] = sub->add_option("--window", o.window, "window side L (> 10 link lengths)")
                          ->check(CLI::PositiveNumber);
        r["boundary"] = sub->add_option("--boundary", o.boundary, "torus | guard")
                            ->check(CLI::IsMember({"torus", "guard"}));
        r["guard"] = sub->add_option("--guard", o.guard, "guard width for --boundary guard")
                         ->check(CLI::NonNegativeNumber);
        r["seed"] = sub->add_option("--seed", o.seed, "random seed (default 0)");
    }
    r["bins"] = simulate->add_option("--bins", o.bins, "histogram bins (>= 2)")
                    ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));

    std::vector<const char*> argv{"soclab"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << SOCLAB_VERSION << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    CLI::App* chosen = app.get_subcommands().front();
    // Options registered on several subcommands share a name; keep the ones of
    // the chosen subcommand.
    for (auto& [name, opt] : r) {
        CLI::Option* mine = chosen->get_option_no_throw("--" + name);
        opt = mine != nullptr ? mine : opt;
    }

    try {
        configure_threads(err);
        const std::string name = chosen->get_name();
        apply_preset(ctx, name);
        ctx.manifest.command = name;
        ctx.manifest.version = SOCLAB_VERSION;
        ctx.manifest.seed = o.seed;
        Table table;
        if (name == "eval") {
            table = cmd_eval(ctx);
        } else if (name == "meta") {
            table = cmd_meta(ctx);
        } else if (name == "lambda-eps") {
            table = cmd_lambda_eps(ctx);
        } else if (name == "soc") {
            table = cmd_soc(ctx);
        } else if (name == "bounds") {
            table = cmd_bounds(ctx);
        } else if (name == "asymptotic") {
            table = cmd_asymptotic(ctx);
        } else if (name == "simulate") {
            table = cmd_simulate(ctx);
        } else {
            table = cmd_compare_tc(ctx);
        }

        const std::string csv = render_csv(ctx.manifest, table);
        const auto body_start = csv.find('\n', csv.find("# checksum: ")) + 1;
        ctx.manifest.checksum = fnv1a64(csv.substr(body_start));
        const std::string text = o.json ? render_json(ctx.manifest, table) : csv;
        if (o.out.empty()) {
            out << text;
        } else {
            std::ofstream file(o.out, std::ios::binary);
            if (!file) {
                throw UsageError("--out", "cannot open '" + o.out + "' for writing");
            }
            file << text;
        }
        if (table.warning) {
            err << "warning: some results did not meet the numerical tolerance; see the warning column\n";
            return kExitWarning;
        }
        return kExitOk;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitWarning;
    }
}

}  // namespace soclab::cli
