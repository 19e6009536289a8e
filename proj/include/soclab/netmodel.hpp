#pragma once

#include <complex>
#include <variant>

// Poisson bipolar network with ALOHA and Rayleigh fading: parameters, the
// diversity polynomial and the moments of the conditional success probability.

namespace soclab {

using Complex = std::complex<double>;

/// Every transmitter has its receiver at distance `r`.
struct FixedDistance {
    double r = 1.0;
};

/// Receivers form an independent PPP of density `mu`; each transmitter links
/// to its nearest receiver, so link distances are Rayleigh with mean 1/(2 sqrt(mu)).
struct RayleighNearest {
    double mu = 1.0;
};

using LinkDistanceModel = std::variant<FixedDistance, RayleighNearest>;

enum class LinkKind { fixed, rayleigh };

/// Network parameterization. The path-loss exponent is stored; delta = 2/alpha
/// is always derived from it.
class ModelParams {
public:
    ModelParams(double lambda, double p, double theta, double alpha,
                LinkDistanceModel link = FixedDistance{});

    double lambda() const { return lambda_; }
    double p() const { return p_; }
    double theta() const { return theta_; }
    double alpha() const { return alpha_; }
    double delta() const { return 2.0 / alpha_; }
    const LinkDistanceModel& link() const { return link_; }
    LinkKind link_kind() const;

    ModelParams with_lambda(double lambda) const;
    ModelParams with_p(double p) const;
    ModelParams with_lambda_p(double lambda, double p) const;

private:
    double lambda_;
    double p_;
    double theta_;
    double alpha_;
    LinkDistanceModel link_;
};

/// A moment M_b of the conditional link success probability.
struct MomentValue {
    Complex order;
    Complex value;
    LinkKind model = LinkKind::fixed;
};

/// Rescales a fixed-distance network to unit link distance (lambda -> lambda R^2).
/// Identity for the nearest-receiver model.
ModelParams normalize_scale(const ModelParams& params);

/// D_b(p, delta) = p b 2F1(1 - b, 1 - delta; 2; p). Positive integer orders use
/// the finite binomial sum.
Complex diversity_poly(Complex b, double p, double delta);

/// Finite sum sum_{k=1}^{b} C(b,k) C(delta-1,k-1) p^k for integer b >= 0.
double diversity_poly_integer(int b, double p, double delta);

/// Large-b asymptote p^delta b^delta / Gamma(1 + delta).
double diversity_poly_asymptotic(double b, double p, double delta);

/// Derivative of D_b with respect to b at b = 0: (1 - (1-p)^delta) / delta.
double diversity_poly_slope_at_zero(double p, double delta);

/// Interference constant K such that M_b = exp(-K D_b) (fixed) or
/// M_b = 1 / (1 + K D_b) (nearest receiver).
/// Fixed: K = lambda C theta^delta with C = pi R^2 Gamma(1+delta) Gamma(1-delta).
/// Nearest receiver: K = lambda theta^delta Gamma(1+delta) Gamma(1-delta) / mu.
double interference_constant(const ModelParams& params);

/// log M_b, finite even where M_b underflows.
Complex log_moment(const ModelParams& params, Complex b);

MomentValue moment(const ModelParams& params, Complex b);

/// Mean success probability p_s = M_1.
double mean_success(const ModelParams& params);

/// var(P_s) = M_2 - M_1^2.
double variance_ps(const ModelParams& params);

/// Closed-form fixed-distance variance M_1^2 (M_1^(p(delta-1)) - 1).
double variance_ps_closed_form(const ModelParams& params);

/// Density of active transmitters lambda p at which the fixed-distance mean
/// success probability equals `target`. Only theta, alpha and R of the
/// template are used.
double ps_inverse(double target, const ModelParams& params_template);

}  // namespace soclab
