#include <doctest.h>

#include <cmath>

#include "soclab/metadist.hpp"

using namespace soclab;

// Reference values from mpmath quadosc on the Gil-Pelaez integral (30 digits).

TEST_CASE("exact meta distribution at reference points") {
    const auto a = eta_gil_pelaez(ModelParams(0.0675, 1.0, 0.1, 4.0), 0.1);
    CHECK(a.ok());
    CHECK(a.eta == doctest::Approx(0.79954273938).epsilon(1e-8));

    const auto b = eta_gil_pelaez(ModelParams(0.5, 1.0 / 3.0, 1.0, 4.0), 0.1);
    CHECK(b.ok());
    CHECK(b.eta == doctest::Approx(5.195367747e-4).epsilon(1e-7));
    CHECK(b.contour_shift > 0.0);
}

TEST_CASE("shifted and classical contours agree") {
    GilPelaezConfig classical;
    classical.shift_contour = false;
    for (const auto& m : {ModelParams(0.3, 0.5, 0.1, 4.0), ModelParams(1.0, 1.0, 0.1, 4.0),
                          ModelParams(0.2, 0.2, 1.0, 3.0)}) {
        for (double eps : {0.05, 0.2, 0.5}) {
            const auto s = eta_gil_pelaez(m, eps);
            const auto c = eta_gil_pelaez(m, eps, classical);
            CHECK(std::abs(s.eta - c.eta) < 1e-6);
        }
    }
}

TEST_CASE("meta distribution is a valid complementary cdf") {
    const ModelParams m(0.4, 0.6, 0.1, 4.0);
    double prev = 0.0;
    for (double eps = 0.02; eps < 1.0; eps += 0.04) {
        const double eta = eta_gil_pelaez(m, eps).eta;
        CHECK(eta >= -1e-6);
        CHECK(eta <= 1.0 + 1e-6);
        CHECK(eta >= prev - 1e-6);
        prev = eta;
    }
}

TEST_CASE("integrating the meta distribution recovers the mean") {
    // E[P_s] = int_0^1 P(P_s > x) dx
    for (const auto& m : {ModelParams(0.4, 0.6, 0.1, 4.0), ModelParams(0.5, 0.5, 1.0, 4.0, RayleighNearest{1.0})}) {
        const int n = 400;
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = (i + 0.5) / n;
            sum += eta_gil_pelaez(m, 1.0 - x).eta / n;
        }
        CHECK(sum == doctest::Approx(mean_success(m)).epsilon(2e-3));
    }
}

TEST_CASE("beta approximation matches the first two moments") {
    const ModelParams m(0.3, 0.5, 0.1, 4.0);
    const BetaShape s = beta_shape(m);
    CHECK(s.mean == doctest::Approx(mean_success(m)));
    const double a = s.mean * s.shape_beta / (1.0 - s.mean);
    const double b = s.shape_beta;
    const double var = a * b / ((a + b) * (a + b) * (a + b + 1.0));
    CHECK(var == doctest::Approx(variance_ps(m)).epsilon(1e-10));

    const auto r = eta_beta_approx(m, 0.2);
    CHECK(r.method == MetaMethod::beta_approx);
    CHECK(std::abs(r.eta - eta_gil_pelaez(m, 0.2).eta) < 0.05);
}

TEST_CASE("degenerate variance falls back to the step function") {
    const ModelParams m(1e-17, 1.0, 0.1, 4.0);
    CHECK_THROWS_AS(beta_shape(m), DegenerateVarianceError);
    const auto r = eta_beta_approx(m, 0.1);
    CHECK(r.status == MetaStatus::degenerate);
    CHECK(r.ok());
    CHECK(r.eta == 1.0);
}

TEST_CASE("lambda_eps and validation") {
    const ModelParams m(0.5, 0.4, 0.1, 4.0);
    const auto r = lambda_eps(m, 0.1, MetaMethod::gil_pelaez);
    CHECK(r.lambda_eps == doctest::Approx(0.5 * 0.4 * r.eta));
    CHECK_THROWS_AS(lambda_eps(m, 0.1, MetaMethod::monte_carlo), std::invalid_argument);
    CHECK_THROWS_AS(eta_gil_pelaez(m, 0.0), std::domain_error);
    CHECK_THROWS_AS(eta_gil_pelaez(m, 1.0), std::domain_error);
    GilPelaezConfig bad;
    bad.abs_tol = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("integrand limit at the origin") {
    const ModelParams m(0.3, 0.5, 0.1, 4.0);
    CHECK(gil_pelaez_integrand(m, 0.1, 1e-7) ==
          doctest::Approx(gil_pelaez_integrand_at_zero(m, 0.1)).epsilon(1e-5));
}
