#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "hlim/core_math.hpp"
#include "hlim/quadrature.hpp"
#include "hlim/rng.hpp"

using namespace hlim;

TEST_CASE("hermite_poly matches the recurrence anchors") {
    CHECK(hermite_poly(2, 2.0) == doctest::Approx(3.0));
    CHECK(hermite_poly(0, 7.3) == doctest::Approx(1.0));
    CHECK(hermite_poly(3, 2.0) == doctest::Approx(2.0));
    CHECK(hermite_poly(4, 1.5) == doctest::Approx(1.5 * 1.5 * 1.5 * 1.5 -
                                                  6.0 * 1.5 * 1.5 + 3.0));
    CHECK_THROWS_AS(hermite_poly(51, 0.0), std::domain_error);
    CHECK_THROWS_AS(hermite_poly(-1, 0.0), std::domain_error);
}

TEST_CASE("rho: unit value at zero, evenness, Brownian triangle") {
    for (int i = 1; i < 20; ++i) {
        Hurst H(i / 20.0);
        CHECK(rho(H, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
        for (int j = 0; j < 1000; ++j) {
            double x = -5.0 + 10.0 * j / 999.0;
            CHECK(rho(H, -x) == doctest::Approx(rho(H, x)).epsilon(1e-13));
        }
    }
    Hurst half(0.5);
    CHECK(rho(half, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(rho(half, 2.0) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("rho_eps_eta identities") {
    Hurst H(0.3);
    CHECK_THROWS_AS(rho_eps_eta(H, 0.0, 1.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(rho_eps_eta(H, 1.0, -1.0, 0.5), std::domain_error);

    // eps = eta = 1 reduces to rho.
    for (double x : {-2.0, -0.3, 0.0, 0.7, 1.5})
        CHECK(rho_eps_eta(H, 1.0, 1.0, x) ==
              doctest::Approx(rho(H, x)).epsilon(1e-14));

    // variance of one increment
    CHECK(rho_eps_eta(H, 0.25, 0.25, 0.0) ==
          doctest::Approx(std::pow(0.25, 0.6)).epsilon(1e-14));

    // scaling rho_{e,e}(x) = e^{2H} rho(x/e) at random points
    std::uint64_t seed = 1234;
    for (int i = 0; i < 200; ++i) {
        Hurst Hr(0.05 + 0.9 * rng_uniform(seed, 3 * i));
        double eps = 0.01 + rng_uniform(seed, 3 * i + 1);
        double x = 4.0 * (rng_uniform(seed, 3 * i + 2) - 0.5);
        double lhs = rho_eps_eta(Hr, eps, eps, x);
        double rhs = std::pow(eps, 2.0 * Hr.value()) * rho(Hr, x / eps);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("fbm covariance anchors") {
    Hurst H(0.7);
    CHECK(fbm_covariance(H, 1.3, 1.3) ==
          doctest::Approx(std::pow(1.3, 1.4)).epsilon(1e-14));
    CHECK(fbm_covariance(H, 2.0, 0.0) == doctest::Approx(0.0).scale(1.0));
    Hurst half(0.5);
    CHECK(fbm_covariance(half, 0.7, 0.4) == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(fbm_covariance(half, 0.2, 0.9) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK_THROWS_AS(fbm_covariance(H, -1.0, 0.5), std::domain_error);
}

TEST_CASE("psi anchors and asymptote") {
    Hurst H(0.35);
    CHECK(psi(H, 0.0) == doctest::Approx(-2.0).epsilon(1e-14));
    for (double x : {0.2, 1.7, 3.0})
        CHECK(psi(H, -x) == doctest::Approx(psi(H, x)).epsilon(1e-13));
    double h = H.value();
    double x = 3.0e5;
    CHECK(psi(H, x) / std::pow(x, 2.0 * h) ==
          doctest::Approx(-(2.0 * h + 2.0) * (2.0 * h + 1.0)).epsilon(1e-4));
}

TEST_CASE("integral_rho_power Brownian anchors and divergence") {
    QuadratureSpec spec;
    Hurst half(0.5);
    CHECK(integral_rho_power(half, 2, spec) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-8));
    CHECK(integral_rho_power(half, 3, spec) ==
          doctest::Approx(0.5).epsilon(1e-8));
    CHECK_THROWS_AS(integral_rho_power(Hurst(0.75), 2, spec),
                    std::domain_error);
    CHECK_THROWS_AS(integral_rho_power(Hurst(0.9), 3, spec),
                    std::domain_error);
    // just below the threshold still converges
    CHECK(integral_rho_power(Hurst(0.7), 2, spec) > 0.0);
}

TEST_CASE("c_kh arithmetic and thresholds") {
    CHECK(c_kh(Hurst(0.8), 2) == doctest::Approx(1.92).epsilon(1e-12));
    // Direct arithmetic on the formula: (0.9*0.8)^2 / (0.8*0.6).
    CHECK(c_kh(Hurst(0.9), 2) == doctest::Approx(1.08).epsilon(1e-12));
    CHECK_THROWS_AS(c_kh(Hurst(0.75), 2), std::domain_error);
    CHECK_THROWS_AS(c_kh(Hurst(0.6), 2), std::domain_error);
    // blows up approaching the threshold from above
    CHECK(c_kh(Hurst(0.75 + 1e-9), 2) > 1e7);
}

TEST_CASE("limit_prediction regimes follow the thresholds") {
    QuadratureSpec spec;
    for (int i = 1; i <= 9; ++i) {
        double h = i / 10.0;
        Hurst H(h);

        auto rh2 = classify_regime(FunctionalKind::hermite(2), H);
        if (h < 0.75) CHECK(rh2 == Regime::GaussianCLT);
        if (h == 0.75) CHECK(rh2 == Regime::CriticalLog);
        if (h > 0.75) CHECK(rh2 == Regime::L2Limit);

        auto rh3 = classify_regime(FunctionalKind::hermite(3), H);
        double thr3 = 1.0 - 1.0 / 6.0;
        if (h < thr3) CHECK(rh3 == Regime::GaussianCLT);
        if (h > thr3) CHECK(rh3 == Regime::L2Limit);

        auto rt = classify_regime(FunctionalKind::tilde(), H);
        if (h < 0.5) CHECK(rt == Regime::SStarOnly);
        if (h >= 0.5) CHECK(rt == Regime::L2Limit);

        auto rb = classify_regime(FunctionalKind::breve(), H);
        if (h < 0.25) CHECK(rb == Regime::GaussianCLT);
        if (h == 0.25) CHECK(rb == Regime::CriticalLog);
        if (h > 0.25) CHECK(rb == Regime::L2Limit);

        auto rhat = classify_regime(FunctionalKind::hat(), H);
        if (h < 0.75) CHECK(rhat == Regime::GaussianCLT);
        if (h == 0.75) CHECK(rhat == Regime::CriticalLog);
        if (h > 0.75) CHECK(rhat == Regime::L2Limit);
    }
    // critical detection with 1e-12 tolerance
    CHECK(classify_regime(FunctionalKind::hermite(3), Hurst(1.0 - 1.0 / 6.0)) ==
          Regime::CriticalLog);
}

TEST_CASE("limit_prediction constants") {
    QuadratureSpec spec;

    auto lp = limit_prediction(FunctionalKind::hermite(2), Hurst(0.8), 1.0, spec);
    CHECK(lp.regime == Regime::L2Limit);
    CHECK(lp.limit_constant == doctest::Approx(1.92).epsilon(1e-10));
    CHECK(lp.t_exponent == doctest::Approx(1.2).epsilon(1e-14));

    auto hat_crit = limit_prediction(FunctionalKind::hat(), Hurst(0.75), 1.0, spec);
    CHECK(hat_crit.regime == Regime::CriticalLog);
    CHECK(hat_crit.limit_constant == doctest::Approx(9.0 / 32.0).epsilon(1e-14));
    CHECK(hat_crit.log_normalization);

    auto breve_half = limit_prediction(FunctionalKind::breve(), Hurst(0.5), 1.0, spec);
    CHECK(breve_half.regime == Regime::L2Limit);
    CHECK(breve_half.limit_constant == doctest::Approx(0.5).epsilon(1e-12));

    auto tilde_half = limit_prediction(FunctionalKind::tilde(), Hurst(0.5), 1.0, spec);
    CHECK(tilde_half.regime == Regime::L2Limit);
    CHECK(tilde_half.limit_constant == doctest::Approx(0.5).epsilon(1e-12));

    // critical ratio hat / hermite2 at H = 3/4 is exactly 1/2
    auto herm_crit =
        limit_prediction(FunctionalKind::hermite(2), Hurst(0.75), 1.0, spec);
    CHECK(hat_crit.limit_constant / herm_crit.limit_constant ==
          doctest::Approx(0.5).epsilon(1e-13));

    // limit_constant >= 0 across a regime sweep
    for (int i = 1; i <= 17; ++i) {
        Hurst H(i / 18.0);
        for (auto kind : {FunctionalKind::hermite(2), FunctionalKind::hermite(3),
                          FunctionalKind::tilde(), FunctionalKind::breve(),
                          FunctionalKind::hat()}) {
            if (kind.family == Family::Tilde && H.value() > 0.5 &&
                H.value() < 0.52)
                continue;  // near-degenerate quadrature band excluded
            auto p = limit_prediction(kind, H, 1.0, spec);
            CHECK(p.limit_constant >= 0.0);
        }
    }
}

TEST_CASE("hat sigma^2 equals the rho^2 integral (algebraic identity)") {
    QuadratureSpec spec;
    for (double h : {0.1, 0.25, 0.4, 0.5, 0.6, 0.7}) {
        Hurst H(h);
        CHECK(hat_sigma2(H, spec) ==
              doctest::Approx(integral_rho_power(H, 2, spec)).epsilon(1e-10));
    }
}

TEST_CASE("tilde half-line rho report") {
    QuadratureSpec spec;
    auto hl = tilde_rho_half_line(Hurst(0.3), spec);
    CHECK(hl.closed_form_limit == 0.0);
    // truncated value is materially nonzero: ~ H A^{2H-1}
    CHECK(hl.truncated_quadrature ==
          doctest::Approx(0.3 * std::pow(50.0, -0.4)).epsilon(0.05));
    auto hl5 = tilde_rho_half_line(Hurst(0.5), spec);
    CHECK(hl5.closed_form_limit == doctest::Approx(0.5));
    CHECK(hl5.truncated_quadrature == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("Lambda closed form matches brute-force 2D quadrature") {
    QuadratureSpec spec;
    spec.rel_tol = 1e-9;
    for (double h : {0.3, 0.5, 0.7}) {
        Hurst H(h);
        double eps = 1.0 / 16.0, eta = 1.0 / 32.0;
        for (auto [u, up] : std::vector<std::pair<double, double>>{
                 {0.4, 0.7}, {0.9, 0.2}, {0.5, 0.5}}) {
            auto inner = [&](double s) {
                auto g = [&](double sp) {
                    return rho_eps_eta(H, eps, eta, s - sp);
                };
                return integrate_with_breaks(
                    g, 0.0, up, {s, s + eps, s - eta, s - eta + eps}, spec);
            };
            double brute = integrate_with_breaks(
                inner, 0.0, u, {eps, eta, eta - eps, up}, spec);
            double closed = lambda_eps_eta(H, eps, eta, u, up);
            CHECK(closed == doctest::Approx(brute).epsilon(1e-6));
        }
    }
}

TEST_CASE("second_moment_exact: Hat agrees between 1D reduction and 2D") {
    QuadratureSpec spec;
    Hurst H(0.6);
    double a = second_moment_exact(FunctionalKind::hat(), H, 1.0, 1.0 / 16.0,
                                   1.0 / 32.0, spec);
    double b = hat_second_moment_2d(H, 1.0, 1.0 / 16.0, 1.0 / 32.0, spec);
    CHECK(a == doctest::Approx(b).epsilon(1e-8));
}

TEST_CASE("second_moment_exact: Hermite variation approaches k! c_kh limit") {
    QuadratureSpec spec;
    Hurst H(0.8);
    std::vector<double> vals;
    for (int j = 4; j <= 10; ++j) {
        double eps = std::pow(2.0, -j);
        vals.push_back(second_moment_exact(FunctionalKind::hermite(2), H, 1.0,
                                           eps, eps, spec));
    }
    // Cauchy differences shrink monotonically
    for (std::size_t i = 2; i < vals.size(); ++i) {
        double d_prev = std::abs(vals[i - 1] - vals[i - 2]);
        double d_cur = std::abs(vals[i] - vals[i - 1]);
        CHECK(d_cur < d_prev);
    }
    // The raw second moment E[G_eps^2] converges to k! c_{k,H} T^{(2H-2)k+2}
    // at rate eps^{4H-3}; Richardson-extrapolate at the known rate.
    double r = std::pow(2.0, -(4.0 * H.value() - 3.0));
    std::size_t n = vals.size();
    double extrap = vals[n - 1] + (vals[n - 1] - vals[n - 2]) * r / (1.0 - r);
    CHECK(extrap == doctest::Approx(2.0 * 1.92).epsilon(0.02));
}

TEST_CASE("second_moment_exact: Breve Brownian anchor") {
    QuadratureSpec spec;
    Hurst H(0.5);
    double v6 = second_moment_exact(FunctionalKind::breve(), H, 1.0,
                                    1.0 / 64.0, 1.0 / 64.0, spec);
    CHECK(v6 == doctest::Approx(0.5).epsilon(0.05));
    double v8 = second_moment_exact(FunctionalKind::breve(), H, 1.0,
                                    1.0 / 256.0, 1.0 / 256.0, spec);
    CHECK(std::abs(v8 - 0.5) < std::abs(v6 - 0.5));
    CHECK_THROWS_AS(second_moment_exact(FunctionalKind::breve(), H, 1.0, 0.0,
                                        0.1, spec),
                    std::domain_error);
}

TEST_CASE("breve sigma^2 is nonnegative in its regime") {
    QuadratureSpec spec;
    for (double h : {0.05, 0.1, 0.15, 0.2, 0.24}) {
        double s2 = breve_sigma2(Hurst(h), spec);
        CHECK(s2 >= 0.0);
    }
    CHECK_THROWS_AS(breve_sigma2(Hurst(0.3), spec), std::domain_error);
}
