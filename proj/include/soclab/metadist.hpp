#pragma once

#include <cstddef>
#include <stdexcept>
#include <string_view>

#include "soclab/netmodel.hpp"

// Meta distribution eta(theta, eps) = P(P_s > 1 - eps) and the density of
// reliable links lambda_eps = lambda p eta.

namespace soclab {

enum class MetaMethod { gil_pelaez, beta_approx, monte_carlo };

std::string_view to_string(MetaMethod method);

enum class MetaStatus {
    ok,
    truncated,        // integrand envelope still above tolerance at the u cap
    not_converged,    // a quadrature panel or the panel budget was exhausted
    degenerate,       // variance too small for a beta fit; step function used
};

std::string_view to_string(MetaStatus status);

struct GilPelaezConfig {
    double abs_tol = 1e-6;
    double u_min = 1e-6;
    double u_max_cap = 1e5;
    std::size_t max_panels = 20000;
    /// Integrate along Re(s) = c > 0 when the target lies in the lower tail, so
    /// that tiny values of eta are resolved to relative accuracy.
    bool shift_contour = true;
    double rel_tol_tail = 1e-8;

    void validate() const;
};

struct MetaResult {
    double eta = 0.0;
    double lambda_eps = 0.0;
    MetaMethod method = MetaMethod::gil_pelaez;
    double err_estimate = 0.0;
    MetaStatus status = MetaStatus::ok;
    /// Real part of the inversion contour (0 for the classical form).
    double contour_shift = 0.0;

    bool ok() const { return status == MetaStatus::ok || status == MetaStatus::degenerate; }
};

/// Beta distribution with mean M_1 matched to the first two moments.
struct BetaShape {
    double mean = 0.0;
    double shape_beta = 0.0;
};

class DegenerateVarianceError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The Gil-Pelaez integrand u^-1 Im[exp(-j u ln(1-eps)) M_{ju}] at u > 0.
double gil_pelaez_integrand(const ModelParams& params, double eps, double u);

/// Limit of the integrand at u -> 0.
double gil_pelaez_integrand_at_zero(const ModelParams& params, double eps);

/// Exact eta by Gil-Pelaez inversion of the imaginary moments.
MetaResult eta_gil_pelaez(const ModelParams& params, double eps, const GilPelaezConfig& cfg = {});

/// Throws DegenerateVarianceError when var(P_s) <= 1e-15.
BetaShape beta_shape(const ModelParams& params);

/// Beta approximation of eta. Degenerate variance falls back to the p -> 0
/// step function (eta = 1 if 1 - eps < p_s else 0) with status `degenerate`.
MetaResult eta_beta_approx(const ModelParams& params, double eps);

/// lambda_eps = lambda p eta with eta from the chosen method.
MetaResult lambda_eps(const ModelParams& params, double eps, MetaMethod method,
                      const GilPelaezConfig& cfg = {});

}  // namespace soclab
