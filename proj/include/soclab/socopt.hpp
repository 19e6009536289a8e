#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "soclab/metadist.hpp"
#include "soclab/netmodel.hpp"

// Spatial outage capacity: optimization of lambda_eps over (lambda, p),
// Markov-type bounds, constrained SOC and the high-reliability closed forms.

namespace soclab {

enum class SocMethod { exact, beta_approx };

std::string_view to_string(SocMethod method);

struct SocResult {
    double soc = 0.0;
    double lambda_star = 0.0;
    double p_star = 1.0;
    double eta_star = 0.0;
    double ps_star = 0.0;
    SocMethod method = SocMethod::exact;
    bool converged = false;
    std::size_t evaluations = 0;
};

struct AsymptoticConstants {
    double kappa = 0.0;
    double c_geom = 0.0;   // pi Gamma(1+delta) Gamma(1-delta)
    double c_prime = 0.0;  // pi Gamma(1-delta)
    double rho = 0.0;      // eps / theta
    double c_delta = 0.0;  // (1/delta)^delta e^-(1-delta) / Gamma(1-delta)

    static AsymptoticConstants make(double theta, double eps, double alpha);
};

enum class BoundKind { markov_upper, tightest_markov, reverse_markov_lower, asymptotic, exact };

std::string_view to_string(BoundKind kind);

struct BoundCurve {
    std::string sweep_variable;
    std::vector<double> grid;
    std::vector<double> values;
    BoundKind kind = BoundKind::exact;
};

struct OptimizerConfig {
    std::size_t lambda_points = 25;
    std::size_t p_points = 21;
    double lambda_lo = 1e-3;  // in units of 1 / (C theta^delta)
    double lambda_hi = 1e1;
    double rel_step_tol = 1e-4;
    std::size_t max_iterations = 400;
    /// Tail accuracy is irrelevant to the maximizer, so the classical
    /// inversion contour is used.
    GilPelaezConfig gil_pelaez{.shift_contour = false};
};

/// Maximizes lambda_eps over lambda > 0 and p in (0, 1]: a log-lambda by p
/// grid (evaluated in parallel) followed by pattern search in
/// (log lambda p, log p) from the best cell.
SocResult soc_optimize(double theta, double eps, double alpha, const LinkDistanceModel& link,
                       SocMethod method, const OptimizerConfig& cfg = {});

/// Serial grid evaluation, kept as the reference for the parallel version.
std::vector<double> soc_objective_grid_serial(const ModelParams& base, double eps, SocMethod method,
                                              const std::vector<double>& lambdas,
                                              const std::vector<double>& ps,
                                              const GilPelaezConfig& cfg = {});

/// OpenMP grid evaluation; bit-identical to the serial version.
std::vector<double> soc_objective_grid(const ModelParams& base, double eps, SocMethod method,
                                       const std::vector<double>& lambdas,
                                       const std::vector<double>& ps,
                                       const GilPelaezConfig& cfg = {});

struct TransmissionCapacity {
    double tc = 0.0;
    double lambda_p = 0.0;
};

/// c(theta, eps) = (1 - eps) p_s^-1(1 - eps) for the fixed model with R = 1.
TransmissionCapacity transmission_capacity(double theta, double eps, double alpha);

struct ConstrainedSoc {
    double value = 0.0;
    bool boundary = false;
};

/// p -> 0 limit of lambda_eps at fixed nu = lambda p (fixed model, R = 1):
/// nu if 1 - eps < p_s, 0 if 1 - eps > p_s, nu with the boundary flag at equality.
ConstrainedSoc constrained_soc(double nu, double theta, double eps, double alpha,
                               double equality_tol = 1e-12);

/// Markov upper bound for moment order b > 0.
double markov_upper(double b, double theta, double eps, double alpha, const LinkDistanceModel& link);

enum class TightestMode { analytic, numeric };

double tightest_markov_upper(double theta, double eps, double alpha, const LinkDistanceModel& link,
                             TightestMode mode);

struct LowerBound {
    double value = 0.0;
    double lambda = 0.0;
    double p = 1.0;
    bool converged = true;
};

/// Reverse Markov lower bound of order b >= 1. b = 1 is closed form; b >= 2
/// maximizes lambda p (1 - sum_k C(b,k) (-1)^k M_k / eps^b) numerically.
LowerBound reverse_markov_lower(int b, double theta, double eps, double alpha,
                                const LinkDistanceModel& link, const OptimizerConfig& cfg = {});

/// High-reliability asymptote of lambda_eps.
double lambda_eps_asymptotic(const ModelParams& params, double eps);

struct SocAsymptote {
    double soc = 0.0;
    double lambda_opt = 0.0;  // NaN for the nearest-receiver model
    double eta_opt = 0.0;     // NaN for the nearest-receiver model
    double ps_opt = 0.0;      // NaN for the nearest-receiver model
    double p_opt = 1.0;
};

SocAsymptote soc_asymptotic(double theta, double eps, double alpha, const LinkDistanceModel& link);

}  // namespace soclab
