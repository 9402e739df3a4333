#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "hlim/quadrature.hpp"
#include "hlim/white_noise.hpp"

using namespace hlim;

TEST_CASE("hermite functions: value, orthonormality, ladder derivative") {
    CHECK(hermite_function(0, 0.0) ==
          doctest::Approx(std::pow(M_PI, -0.25)).epsilon(1e-12));
    CHECK(hermite_function(0, 0.0) == doctest::Approx(0.7511).epsilon(1e-4));

    QuadratureSpec spec;
    spec.rel_tol = 1e-11;
    for (int n = 0; n <= 8; ++n) {
        for (int m = n; m <= 8; ++m) {
            double ip = integrate(
                [&](double x) {
                    return hermite_function(n, x) * hermite_function(m, x);
                },
                -12.0, 12.0, spec);
            CHECK(ip == doctest::Approx(n == m ? 1.0 : 0.0).scale(1.0).epsilon(
                            1e-8));
        }
    }

    // ladder rule against finite differences
    for (int n = 0; n <= 6; ++n) {
        for (double x : {-2.3, -0.7, 0.0, 0.4, 1.9, 3.5}) {
            double h = 1e-6;
            double fd =
                (hermite_function(n, x + h) - hermite_function(n, x - h)) /
                (2.0 * h);
            CHECK(hermite_function_derivative(n, x) ==
                  doctest::Approx(fd).epsilon(1e-7).scale(1.0));
        }
    }
    CHECK_THROWS_AS(hermite_function(31, 0.0), std::domain_error);
}

TEST_CASE("TestFunction validates its derivative") {
    auto xi = TestFunction::hermite(2);
    CHECK(xi(0.0) == doctest::Approx(hermite_function(2, 0.0)));
    CHECK_THROWS_AS(
        TestFunction([](double x) { return std::exp(-x * x); },
                     [](double x) { return x; },  // wrong derivative
                     "broken"),
        std::invalid_argument);
    auto refl = xi.reflected();
    CHECK(refl(1.3) == doctest::Approx(xi(-1.3)));
    CHECK(refl.derivative(1.3) == doctest::Approx(-xi.derivative(-1.3)));
}

TEST_CASE("kernel calibration gives unit variance for every H") {
    for (double h :
         {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
        KernelContext ctx{Hurst(h)};
        CHECK(ctx.unit_variance_check() ==
              doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("Brownian kernel is identically one") {
    KernelContext ctx{Hurst(0.5)};
    CHECK(ctx.c_h() == doctest::Approx(1.0).epsilon(1e-10));
    for (double t : {0.3, 1.0, 2.5}) {
        for (double frac : {0.01, 0.2, 0.5, 0.9, 0.999}) {
            CHECK(ctx.kernel(t, frac * t) ==
                  doctest::Approx(1.0).epsilon(1e-8));
        }
    }
}

TEST_CASE("kernel t-derivative matches finite differences") {
    KernelContext ctx{Hurst(0.7)};
    const double t = 1.0, s = 0.5, h = 1e-5;
    double fd = (ctx.kernel(t + h, s) - ctx.kernel(t - h, s)) / (2.0 * h);
    CHECK(ctx.kernel(t, s, KernelOrder::DtDerivative) ==
          doctest::Approx(fd).epsilon(1e-4));

    KernelContext ctx3{Hurst(0.3)};
    double fd3 = (ctx3.kernel(t + h, s) - ctx3.kernel(t - h, s)) / (2.0 * h);
    CHECK(ctx3.kernel(t, s, KernelOrder::DtDerivative) ==
          doctest::Approx(fd3).epsilon(1e-4));
}

TEST_CASE("kernel branches agree at the switch point") {
    for (double h : {0.2, 0.45, 0.7}) {
        KernelContext ctx{Hurst(h)};
        double below = ctx.kernel(1.0, 0.02 * (1.0 - 1e-9));
        double above = ctx.kernel(1.0, 0.02 * (1.0 + 1e-9));
        CHECK(below == doctest::Approx(above).epsilon(1e-8));
    }
}

TEST_CASE("K+ reduces to the identity at H = 1/2") {
    KernelContext ctx{Hurst(0.5)};
    auto xi = TestFunction::hermite(1);
    double worst = 0.0;
    for (double t = 0.05; t <= 1.0; t += 0.05)
        worst = std::max(worst, std::abs(ctx.k_plus(xi, t) - xi(t)));
    CHECK(worst < 1e-8);
}

TEST_CASE("K+ is linear") {
    KernelContext ctx{Hurst(0.35)};
    auto f = TestFunction::hermite(0);
    auto g = TestFunction::hermite(3);
    auto combo = TestFunction::combination(2.5, f, -1.25, g);
    for (double t : {0.2, 0.7}) {
        double lhs = ctx.k_plus(combo, t);
        double rhs = 2.5 * ctx.k_plus(f, t) - 1.25 * ctx.k_plus(g, t);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("increment identity residual is below 1e-6 on the probe grid") {
    for (double h : {0.3, 0.5, 0.7}) {
        KernelContext ctx{Hurst(h)};
        for (double u : {0.2, 0.5}) {
            for (double eps : {0.1, 0.05}) {
                for (int n = 0; n <= 3; ++n) {
                    auto xi = TestFunction::hermite(n);
                    double res = ctx.increment_identity_residual(xi, u, eps);
                    INFO("H=", h, " u=", u, " eps=", eps, " xi_", n);
                    CHECK(res < 1e-6);
                    // Brownian case: both sides are int_u^{u+eps} xi(s) ds
                    if (h == 0.5) CHECK(res < 1e-10);
                }
            }
        }
    }
}

TEST_CASE("kernel product identity for H > 1/2") {
    KernelContext ctx{Hurst(0.7)};
    CHECK(ctx.kernel_product_residual(0.3, 0.7) < 1e-4);
    CHECK(ctx.kernel_product_residual(0.2, 0.9) < 1e-4);
    KernelContext ctx8{Hurst(0.8)};
    CHECK(ctx8.kernel_product_residual(0.3, 0.7) < 1e-4);
    KernelContext half{Hurst(0.5)};
    CHECK_THROWS_AS(half.kernel_product_residual(0.3, 0.7),
                    std::domain_error);
}

TEST_CASE("bound functions: Brownian anchor, domination, small-t slope") {
    KernelContext half{Hurst(0.5)};
    for (double t : {0.2, 1.0, 2.0}) {
        auto b = half.bound_functions(t);
        CHECK(b.C == doctest::Approx(1.0).epsilon(1e-7));
        CHECK(b.D >= b.C * (1.0 - 1e-9));
    }

    KernelContext ctx{Hurst(0.3)};
    for (double t : {0.3, 0.8}) {
        auto b = ctx.bound_functions(t);
        CHECK(b.D >= b.C * (1.0 - 1e-9));
    }

    // log-log slope of C(t) over [1e-3, 1e-1] approaches H - 1/2
    std::vector<double> ts, cs;
    for (double t = 1e-3; t <= 1e-1 * (1 + 1e-12); t *= std::sqrt(10.0)) {
        ts.push_back(std::log(t));
        cs.push_back(std::log(ctx.bound_functions(t).C));
    }
    double n = ts.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        sx += ts[i];
        sy += cs[i];
        sxx += ts[i] * ts[i];
        sxy += ts[i] * cs[i];
    }
    double slope = (sxy - sx * sy / n) / (sxx - sx * sx / n);
    CHECK(slope == doctest::Approx(0.3 - 0.5).epsilon(0.02));
}

TEST_CASE("s-transform: Brownian k=1 smoke case") {
    KernelContext ctx{Hurst(0.5)};
    auto xi = TestFunction::hermite(1);
    QuadratureSpec spec;
    spec.rel_tol = 1e-10;
    double target = integrate([&](double x) { return xi(x); }, 0.0, 1.0, spec);
    double lim = ctx.s_transform(Family::HermiteVariation, 1, xi, 1.0, 0.0);
    CHECK(lim == doctest::Approx(target).epsilon(1e-7));
    double at = ctx.s_transform(Family::HermiteVariation, 1, xi, 1.0, 1.0 / 64);
    CHECK(at == doctest::Approx(target).epsilon(1e-2));
}

TEST_CASE("s-transform: uniform boundedness and monotone convergence") {
    KernelContext ctx{Hurst(0.6)};
    auto xi = TestFunction::hermite(1);
    const double limit =
        ctx.s_transform(Family::HermiteVariation, 2, xi, 1.0, 0.0);
    CHECK(std::isfinite(limit));

    double bound = 8.0 * std::max(1.0, std::abs(limit));
    double prev_gap = std::numeric_limits<double>::infinity();
    for (int j = 2; j <= 5; ++j) {
        double eps = std::pow(2.0, -j);
        double v = ctx.s_transform(Family::HermiteVariation, 2, xi, 1.0, eps);
        CHECK(std::isfinite(v));
        CHECK(std::abs(v) < bound);
        double gap = std::abs(v - limit);
        CHECK(gap < prev_gap + 1e-8);
        prev_gap = gap;
    }
}

TEST_CASE("finite-eps transform extrapolates onto the K+ limit, H > 1/2") {
    // The finite-eps pairing integral (built from increment S-transforms)
    // must converge to the K+ limit expression; first-order Richardson at
    // eps = 2^-7, 2^-8 removes the O(eps) boundary term.
    KernelContext ctx{Hurst(0.7)};
    auto xi = TestFunction::hermite(1);
    double limit = ctx.s_transform(Family::HermiteVariation, 2, xi, 1.0, 0.0);
    double v7 = ctx.s_transform(Family::HermiteVariation, 2, xi, 1.0,
                                std::pow(2.0, -7));
    double v8 = ctx.s_transform(Family::HermiteVariation, 2, xi, 1.0,
                                std::pow(2.0, -8));
    double extrap = 2.0 * v8 - v7;
    CHECK(extrap == doctest::Approx(limit).epsilon(1e-4));
}

TEST_CASE("bivariate s-transform limits are consistent") {
    KernelContext ctx{Hurst(0.6)};
    auto xi = TestFunction::hermite(1);
    // tilde and breve share the same limit expression
    double tl = ctx.s_transform(Family::Tilde, 2, xi, 1.0, 0.0);
    double bl = ctx.s_transform(Family::Breve, 2, xi, 1.0, 0.0);
    CHECK(tl == doctest::Approx(bl).epsilon(1e-12));
    // finite-eps tilde approaches it
    double t6 = ctx.s_transform(Family::Tilde, 2, xi, 1.0, 1.0 / 64.0);
    double t3 = ctx.s_transform(Family::Tilde, 2, xi, 1.0, 1.0 / 8.0);
    CHECK(std::abs(t6 - tl) < std::abs(t3 - tl));
    // hat limit is symmetric in the reflection
    double hl = ctx.s_transform(Family::Hat, 2, xi, 1.0, 0.0);
    CHECK(std::isfinite(hl));
}
