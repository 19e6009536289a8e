// Acceptance checks: one PASS/FAIL line per criterion.
// Usage: soclab_acceptance [--report] [--cli PATH] [--out FILE]
//   --report  exit 0 once every criterion has been evaluated, even if some fail
//   --cli     soclab executable for the byte-identity check
//   --out     also write the report to FILE

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "soclab/cli.hpp"
#include "soclab/metadist.hpp"
#include "soclab/netmodel.hpp"
#include "soclab/simcore.hpp"
#include "soclab/socopt.hpp"

using namespace soclab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

Outcome mean_success_check() {
    const double ps = mean_success(ModelParams(1.0 / 3.0, 1.0, 0.1, 4.0));
    return {within(ps, 0.5944, 5e-4), fmt::format("p_s = {:.6f} (target 0.5944 +- 5e-4)", ps)};
}

Outcome transmission_capacity_check() {
    const auto tc = transmission_capacity(0.1, 0.1, 4.0);
    return {within(tc.tc, 0.0608, 5e-4) && within(tc.lambda_p, 0.0675, 5e-4),
            fmt::format("c = {:.6f} (0.0608 +- 5e-4) at lambda p = {:.6f} (0.0675 +- 5e-4)", tc.tc,
                        tc.lambda_p)};
}

Outcome soc_check() {
    const auto r = soc_optimize(0.1, 0.1, 4.0, FixedDistance{}, SocMethod::exact);
    const auto beta = soc_optimize(0.1, 0.1, 4.0, FixedDistance{}, SocMethod::beta_approx);
    const bool pass = within(r.soc, 0.09227, 1e-3) && within(r.lambda_star, 0.23, 0.01) &&
                      within(r.p_star, 1.0, 1e-3) && within(r.ps_star, 0.6984, 1e-3);
    return {pass, fmt::format("exact S = {:.6f} (0.09227 +- 1e-3), lambda* = {:.5f} (0.23 +- 0.01), "
                              "p* = {:.4f}, p_s* = {:.5f} (0.6984 +- 1e-3); beta approximation gives "
                              "S = {:.6f}, lambda* = {:.5f}, p_s* = {:.5f}",
                              r.soc, r.lambda_star, r.p_star, r.ps_star, beta.soc, beta.lambda_star,
                              beta.ps_star)};
}

Outcome meta_at_tc_check() {
    const auto r = lambda_eps(ModelParams(0.0675, 1.0, 0.1, 4.0), 0.1, MetaMethod::gil_pelaez);
    return {r.ok() && within(r.eta, 0.82, 0.01) && within(r.lambda_eps, 0.055, 0.001),
            fmt::format("eta = {:.6f} (0.82 +- 0.01), lambda_eps = {:.6f} (0.055 +- 0.001), status {}", r.eta,
                        r.lambda_eps, to_string(r.status))};
}

Outcome moment_identity_check() {
    double worst = 0.0;
    int points = 0;
    for (double nu : {0.01, 0.1, 0.3, 1.0, 3.0}) {
        for (double p : {0.05, 0.25, 0.5, 0.75, 1.0}) {
            for (double alpha : {2.5, 4.0, 6.0}) {
                const ModelParams m(nu / p, p, 0.1, alpha);
                const double m1 = mean_success(m);
                const double m2 = moment(m, 2.0).value.real();
                const double rhs = m1 * m1 * std::pow(m1, p * (m.delta() - 1.0));
                worst = std::max(worst, std::abs(m2 - rhs));
                ++points;
            }
        }
    }
    return {worst <= 1e-10, fmt::format("max |M_2 - M_1^2 M_1^(p(delta-1))| = {:.3e} over {} points (<= 1e-10)",
                                        worst, points)};
}

Outcome beta_accuracy_check() {
    const ModelParams m(0.5, 1.0 / 3.0, 1.0, 4.0);
    double worst = 0.0;
    double at = 0.0;
    const int n = 50;
    bool ok = true;
    for (int i = 0; i < n; ++i) {
        const double eps = 0.01 + (0.5 - 0.01) * i / (n - 1);
        const auto gp = eta_gil_pelaez(m, eps);
        ok = ok && gp.ok();
        const double diff = std::abs(eta_beta_approx(m, eps).eta - gp.eta);
        if (diff > worst) {
            worst = diff;
            at = eps;
        }
    }
    return {ok && worst <= 0.01,
            fmt::format("max |eta_beta - eta_exact| = {:.5f} at eps = {:.3f} over {} points in [0.01, 0.5] (<= 0.01)",
                        worst, at, n)};
}

struct McPoint {
    const char* label;
    ModelParams params;
    double eps;
    double side;
    std::size_t realizations;
};

Outcome monte_carlo_check() {
    const std::vector<McPoint> points{
        {"fixed lambda=1/3 p=1 theta=0.1", ModelParams(1.0 / 3.0, 1.0, 0.1, 4.0), 0.5, 30.0, 40},
        {"fixed lambda=0.8 p=0.5 theta=0.1", ModelParams(0.8, 0.5, 0.1, 4.0), 0.3, 30.0, 40},
        {"fixed lambda=0.0675 p=1 theta=0.1", ModelParams(0.0675, 1.0, 0.1, 4.0), 0.1, 40.0, 100},
        {"rayleigh lambda=1 p=1 theta=0.1", ModelParams(1.0, 1.0, 0.1, 4.0, RayleighNearest{1.0}), 0.1, 20.0, 40},
        {"rayleigh lambda=0.5 p=0.5 theta=1", ModelParams(0.5, 0.5, 1.0, 4.0, RayleighNearest{1.0}), 0.2, 20.0, 60},
    };
    bool pass = true;
    std::ostringstream detail;
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto& pt = points[k];
        sim::SimConfig cfg{pt.params, pt.side, 1000 + k, pt.realizations, {}};
        const auto dist = sim::simulate(cfg);
        const auto eta = sim::empirical_meta(dist, pt.eps);
        const auto m1 = sim::empirical_moment(dist, 1.0);
        const auto m2 = sim::empirical_moment(dist, 2.0);
        const double eta_ref = eta_gil_pelaez(pt.params, pt.eps).eta;
        const double z_eta = (eta.value - eta_ref) / eta.std_err;
        const double z1 = (m1.value - mean_success(pt.params)) / m1.std_err;
        const double z2 = (m2.value - moment(pt.params, 2.0).value.real()) / m2.std_err;
        const bool ok = dist.num_links() >= 10000 && std::abs(z_eta) <= 3.0 && std::abs(z1) <= 3.0 &&
                        std::abs(z2) <= 3.0;
        pass = pass && ok;
        detail << fmt::format("{}[{}: links {}, eta {:.4f} vs {:.4f} (z {:+.2f}), z_M1 {:+.2f}, z_M2 {:+.2f}]",
                              k ? " " : "", pt.label, dist.num_links(), eta.value, eta_ref, z_eta, z1, z2);
    }
    return {pass, detail.str()};
}

Outcome bound_sandwich_check() {
    bool pass = true;
    int points = 0;
    double min_gap_low = HUGE_VAL;
    double min_gap_up = HUGE_VAL;
    double min_gap_fixed = HUGE_VAL;
    for (const LinkDistanceModel& link : {LinkDistanceModel{FixedDistance{}}, LinkDistanceModel{RayleighNearest{1.0}}}) {
        for (int i = 1; i <= 10; ++i) {
            const double eps = 0.05 * i;
            const double soc = soc_optimize(0.1, eps, 4.0, link, SocMethod::exact).soc;
            const double lower = reverse_markov_lower(1, 0.1, eps, 4.0, link).value;
            const double upper = tightest_markov_upper(0.1, eps, 4.0, link, TightestMode::numeric);
            min_gap_low = std::min(min_gap_low, soc - lower);
            min_gap_up = std::min(min_gap_up, upper - soc);
            pass = pass && lower <= soc && soc <= upper;
            for (double b : {1.0, 2.0, 4.0}) {
                const double fixed_b = markov_upper(b, 0.1, eps, 4.0, link);
                min_gap_fixed = std::min(min_gap_fixed, fixed_b - upper);
                pass = pass && upper <= fixed_b;
            }
            ++points;
        }
    }
    return {pass, fmt::format("{} (eps, model) points; min(S - lower) = {:.3e}, min(upper - S) = {:.3e}, "
                              "min(Markov_b - tightest) = {:.3e}",
                              points, min_gap_low, min_gap_up, min_gap_fixed)};
}

Outcome high_reliability_check() {
    const double rho = 0.1 / 0.1;
    const auto a = soc_asymptotic(0.1, 0.1, 4.0, FixedDistance{});
    const double coef = a.soc / std::sqrt(rho);
    const auto r = soc_optimize(0.1, 0.007, 4.0, FixedDistance{}, SocMethod::exact);
    const bool pass = within(coef, 0.15405, 1e-4) && within(a.eta_opt, 0.6065, 1e-4) &&
                      within(r.p_star, 1.0, 1e-3) && within(r.ps_star, 0.8964, 0.005);
    return {pass, fmt::format("coefficient {:.6f} (0.15405 +- 1e-4), eta at SOC point {:.6f} (0.6065 +- 1e-4), "
                              "eps=0.007 exact optimizer p* = {:.4f}, p_s* = {:.5f} (0.8964 +- 0.005) at lambda* = {:.5f}",
                              coef, a.eta_opt, r.p_star, r.ps_star, r.lambda_star)};
}

Outcome asymptotic_convergence_check() {
    const ModelParams m(0.5, 1.0 / 3.0, 1.0, 4.0);
    auto ratio = [&](double eps) {
        const auto r = lambda_eps(m, eps, MetaMethod::gil_pelaez);
        return std::pair{r.lambda_eps / lambda_eps_asymptotic(m, eps), r.status};
    };
    const auto [r2, s2] = ratio(1e-2);
    const auto [r3, s3] = ratio(1e-3);
    const bool part1 = std::abs(r3 - 1.0) < std::abs(r2 - 1.0);

    const ModelParams ray(2.0, 1.0, 0.1, 4.0, RayleighNearest{1.0});
    const double a = lambda_eps(ray, 1e-3, MetaMethod::gil_pelaez).lambda_eps;
    const double b = lambda_eps(ray.with_lambda(4.0), 1e-3, MetaMethod::gil_pelaez).lambda_eps;
    const double change = std::abs(b / a - 1.0);
    const bool part2 = change < 0.02;
    return {part1 && part2,
            fmt::format("exact/asymptote = {:.4e} at eps=1e-2 ({}), {:.4e} at eps=1e-3 ({}) -> {}; "
                        "rayleigh lambda 2 -> 4 changes lambda_eps by {:.3f}% (< 2%)",
                        r2, to_string(s2), r3, to_string(s3), part1 ? "closer" : "not closer",
                        100.0 * change)};
}

Outcome step_behaviour_check() {
    const double nu = 0.0675;
    const ModelParams m(nu / 1e-3, 1e-3, 0.1, 4.0);
    const double hi = eta_gil_pelaez(m, 0.15).eta;
    const double lo = eta_gil_pelaez(m, 0.05).eta;
    return {hi > 0.9 && lo < 0.1,
            fmt::format("eta(p=1e-3, eps=0.15) = {:.6f} (> 0.9), eta(p=1e-3, eps=0.05) = {:.3e} (< 0.1)", hi, lo)};
}

std::string capture(const std::string& command) {
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(command.c_str(), "r"), pclose);
    if (!pipe) {
        return {};
    }
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe.get())) > 0) {
        out.append(buf.data(), n);
    }
    return out;
}

Outcome reproducibility_check(const std::string& cli_path) {
    const std::vector<std::vector<std::string>> runs{
        {"simulate", "--preset", "fig1", "--realizations", "8", "--seed", "42"},
        {"meta", "--lambda", "0.3", "--p", "0.5", "--eps", "0.1,0.2", "--method", "gil-pelaez,beta,mc",
         "--realizations", "5", "--seed", "9"},
        {"lambda-eps", "--preset", "fig3", "--json"},
        {"soc", "--eps", "0.2", "--method", "beta"},
    };
    bool pass = true;
    int compared = 0;
    for (const auto& args : runs) {
        std::ostringstream a;
        std::ostringstream b;
        std::ostringstream err;
        cli::run(args, a, err);
        cli::run(args, b, err);
        pass = pass && !a.str().empty() && a.str() == b.str();
        ++compared;
        if (!cli_path.empty()) {
            std::string cmd = cli_path;
            for (const auto& s : args) {
                cmd += " '" + s + "'";
            }
            cmd += " 2>/dev/null";
            const std::string first = capture(cmd);
            const std::string second = capture(cmd);
            pass = pass && first == second && first == a.str();
            ++compared;
        }
    }
    return {pass, fmt::format("{} repeated runs compared byte for byte{}", compared,
                              cli_path.empty() ? " (in-process only)" : " (in-process and executable)")};
}

}  // namespace

int main(int argc, char** argv) {
    bool report = false;
    std::string cli_path;
    std::string out_path;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--report") {
            report = true;
        } else if (arg == "--cli" && i + 1 < argc) {
            cli_path = argv[++i];
        } else if (arg == "--out" && i + 1 < argc) {
            out_path = argv[++i];
        } else {
            std::cerr << "usage: " << argv[0] << " [--report] [--cli PATH] [--out FILE]\n";
            return 2;
        }
    }

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"mean success probability", mean_success_check},
        {"transmission capacity", transmission_capacity_check},
        {"spatial outage capacity", soc_check},
        {"meta distribution at the TC point", meta_at_tc_check},
        {"second moment identity", moment_identity_check},
        {"beta approximation accuracy", beta_accuracy_check},
        {"Monte Carlo agreement", monte_carlo_check},
        {"bound sandwich", bound_sandwich_check},
        {"high-reliability closed forms", high_reliability_check},
        {"asymptotic convergence", asymptotic_convergence_check},
        {"small-p step behaviour", step_behaviour_check},
        {"reproducibility", [&] { return reproducibility_check(cli_path); }},
    };
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
    }
    auto emit = [&](const std::string& line) {
        std::cout << line << std::endl;
        if (file) {
            file << line << "\n";
        }
    };
    int failed = 0;
    int evaluated = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
            ++evaluated;
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += o.pass ? 0 : 1;
        emit(fmt::format("{} {:2d} {}: {} [{:.1f} s]", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                         o.detail, secs));
    }
    emit(fmt::format("{} of {} criteria passed", criteria.size() - failed, criteria.size()));
    if (report) {
        return evaluated == static_cast<int>(criteria.size()) ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
