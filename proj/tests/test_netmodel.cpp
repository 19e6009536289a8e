#include <doctest.h>

#include <cmath>

#include "soclab/netmodel.hpp"
#include "soclab/specfun.hpp"

using namespace soclab;

// Diversity polynomial and moment references: mpmath hyp2f1 at 30 digits.

TEST_CASE("diversity polynomial reference values") {
    CHECK(diversity_poly(2.0, 0.5, 0.5).real() == doctest::Approx(0.875).epsilon(1e-15));
    CHECK(diversity_poly(2.5, 0.3, 0.5).real() == doctest::Approx(0.668896745310695459).epsilon(1e-13));
    CHECK(diversity_poly(7.3, 0.05, 0.5).real() == doctest::Approx(0.338077648642150435).epsilon(1e-13));
    CHECK(diversity_poly(100.0, 1.0, 0.5).real() == doctest::Approx(11.2696958018512844).epsilon(1e-13));
    const Complex im = diversity_poly(Complex{0.0, 0.5}, 0.7, 0.5);
    CHECK(im.real() == doctest::Approx(0.0658179623563885328).epsilon(1e-12));
    CHECK(im.imag() == doctest::Approx(0.442391560352520181).epsilon(1e-12));
}

TEST_CASE("diversity polynomial for large orders") {
    CHECK(diversity_poly(100.0, 1.0 / 3.0, 0.5).real() == doctest::Approx(6.47360996349706).epsilon(1e-11));
    CHECK(diversity_poly(1000.0, 1.0 / 3.0, 0.5).real() == doctest::Approx(20.5884035046525).epsilon(1e-11));
    CHECK(diversity_poly(10000.0, 1.0 / 3.0, 0.5).real() == doctest::Approx(65.1429295379815).epsilon(1e-10));
    // orders that round to integers in floating point
    const double b = std::exp(20.0 * std::log(1000.0) / 60.0);
    CHECK(diversity_poly(b, 0.5, 0.5).real() == doctest::Approx(diversity_poly(10.0, 0.5, 0.5).real()).epsilon(1e-12));
}

TEST_CASE("diversity polynomial identities") {
    for (double p : {0.05, 0.3, 0.7, 1.0}) {
        for (double delta : {0.4, 0.5, 0.8}) {
            CHECK(diversity_poly(0.0, p, delta).real() == 0.0);
            CHECK(diversity_poly(1.0, p, delta).real() == doctest::Approx(p).epsilon(1e-14));
            for (int n = 2; n <= 6; ++n) {
                // the hypergeometric route against the finite sum
                const double nudged = diversity_poly(n + 1e-9, p, delta).real();
                CHECK(nudged == doctest::Approx(diversity_poly_integer(n, p, delta)).epsilon(1e-7));
            }
        }
    }
    // p = 1 closed form Gamma(b + delta) / (Gamma(b) Gamma(1 + delta))
    CHECK(diversity_poly(3.7, 1.0, 0.8).real() ==
          doctest::Approx(std::tgamma(4.5) / (std::tgamma(3.7) * std::tgamma(1.8))).epsilon(1e-13));
    CHECK_THROWS_AS(diversity_poly(1.0, 0.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(diversity_poly_integer(-1, 0.5, 0.5), std::domain_error);
}

TEST_CASE("diversity polynomial is increasing and concave in b") {
    for (double p : {0.1, 0.5, 1.0}) {
        double prev = 0.0;
        double prev_step = HUGE_VAL;
        for (double b = 0.25; b <= 20.0; b += 0.25) {
            const double d = diversity_poly(b, p, 0.5).real();
            CHECK(d > prev);
            CHECK(d - prev <= prev_step * (1.0 + 1e-12));
            prev_step = d - prev;
            prev = d;
        }
    }
}

TEST_CASE("diversity polynomial approaches its asymptote") {
    for (double p : {0.25, 0.5, 1.0}) {
        const double r1 = diversity_poly(100.0, p, 0.5).real() / diversity_poly_asymptotic(100.0, p, 0.5);
        const double r2 = diversity_poly(10000.0, p, 0.5).real() / diversity_poly_asymptotic(10000.0, p, 0.5);
        CHECK(std::abs(1.0 - r2) < std::abs(1.0 - r1));
        CHECK(std::abs(1.0 - r2) < 2e-3);
    }
}

TEST_CASE("slope of the diversity polynomial at zero") {
    for (double p : {0.2, 0.6, 1.0}) {
        const double h = 1e-6;
        const double fd = diversity_poly(h, p, 0.5).real() / h;
        CHECK(diversity_poly_slope_at_zero(p, 0.5) == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("fixed-distance moments") {
    const ModelParams m(1.0, 1.0, 0.1, 4.0);
    CHECK(mean_success(m) == doctest::Approx(0.210026518931076827).epsilon(1e-13));
    CHECK(moment(m, 2.0).value.real() == doctest::Approx(0.0962523189208963845).epsilon(1e-13));
    CHECK(variance_ps(m) == doctest::Approx(variance_ps_closed_form(m)).epsilon(1e-12));
    CHECK(moment(m, 0.0).value.real() == doctest::Approx(1.0));
}

TEST_CASE("nearest-receiver moments") {
    const ModelParams m(1.0, 1.0, 1.0, 4.0, RayleighNearest{1.0});
    CHECK(m.link_kind() == LinkKind::rayleigh);
    CHECK(mean_success(m) == doctest::Approx(0.388984529648342711).epsilon(1e-13));
    const double k = interference_constant(m);
    CHECK(moment(m, 3.0).value.real() ==
          doctest::Approx(1.0 / (1.0 + k * diversity_poly(3.0, 1.0, 0.5).real())).epsilon(1e-13));
}

TEST_CASE("moments decrease in b and satisfy Jensen") {
    for (const auto& m : {ModelParams(0.3, 0.4, 0.1, 4.0), ModelParams(2.0, 0.7, 1.0, 3.0),
                          ModelParams(0.5, 0.5, 0.5, 4.0, RayleighNearest{2.0})}) {
        double prev = 1.0;
        for (double b = 0.5; b <= 8.0; b += 0.5) {
            const double v = moment(m, b).value.real();
            CHECK(v < prev);
            prev = v;
        }
        const double m1 = mean_success(m);
        CHECK(moment(m, 2.0).value.real() >= m1 * m1);
        CHECK(variance_ps(m) <= m1 * (1.0 - m1));
    }
}

TEST_CASE("log moment stays finite where the moment underflows") {
    const ModelParams m(200.0, 1.0, 10.0, 4.0);
    CHECK(moment(m, 50.0).value.real() == 0.0);
    const Complex lm = log_moment(m, 50.0);
    CHECK(std::isfinite(lm.real()));
    CHECK(lm.real() < -745.0);
}

TEST_CASE("scale normalization") {
    const ModelParams m(0.2, 0.5, 0.1, 4.0, FixedDistance{3.0});
    const ModelParams n = normalize_scale(m);
    CHECK(n.lambda() == doctest::Approx(1.8));
    CHECK(mean_success(m) == doctest::Approx(mean_success(n)).epsilon(1e-14));
    CHECK(moment(m, 2.5).value.real() == doctest::Approx(moment(n, 2.5).value.real()).epsilon(1e-14));
}

TEST_CASE("ps_inverse inverts the mean success probability") {
    const ModelParams tmpl(1.0, 1.0, 0.1, 4.0);
    for (double target : {0.5, 0.9, 0.99}) {
        const double nu = ps_inverse(target, tmpl);
        CHECK(mean_success(ModelParams(nu, 1.0, 0.1, 4.0)) == doctest::Approx(target).epsilon(1e-12));
    }
    CHECK_THROWS_AS(ps_inverse(0.5, ModelParams(1.0, 1.0, 0.1, 4.0, RayleighNearest{1.0})),
                    std::domain_error);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(ModelParams(0.0, 0.5, 0.1, 4.0), std::domain_error);
    CHECK_THROWS_AS(ModelParams(1.0, 0.0, 0.1, 4.0), std::domain_error);
    CHECK_THROWS_AS(ModelParams(1.0, 1.5, 0.1, 4.0), std::domain_error);
    CHECK_THROWS_AS(ModelParams(1.0, 0.5, -1.0, 4.0), std::domain_error);
    CHECK_THROWS_AS(ModelParams(1.0, 0.5, 0.1, 2.0), std::domain_error);
    CHECK_THROWS_AS(ModelParams(1.0, 0.5, 0.1, 4.0, FixedDistance{0.0}), std::domain_error);
    CHECK_THROWS_AS(ModelParams(1.0, 0.5, 0.1, 4.0, RayleighNearest{-1.0}), std::domain_error);
    const ModelParams m(1.0, 0.5, 0.1, 4.0);
    CHECK(m.delta() == 0.5);
    CHECK(m.with_lambda_p(2.0, 0.25).lambda() == 2.0);
    CHECK(m.with_p(0.25).p() == 0.25);
}
