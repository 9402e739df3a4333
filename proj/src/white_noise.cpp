#include "hlim/white_noise.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "hlim/common.hpp"

namespace hlim {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double hermite_function(int n, double x) {
    if (n < 0 || n > 30)
        throw std::domain_error("hermite_function order must lie in [0,30]");
    const double phi0 = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
    if (n == 0) return phi0;
    double prev = phi0;
    double cur = std::sqrt(2.0) * x * phi0;
    for (int k = 1; k < n; ++k) {
        double next = x * std::sqrt(2.0 / (k + 1.0)) * cur -
                      std::sqrt(k / (k + 1.0)) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double hermite_function_derivative(int n, double x) {
    if (n < 0 || n > 30)
        throw std::domain_error("hermite_function order must lie in [0,30]");
    const double lower = n == 0 ? 0.0 : hermite_function(n - 1, x);
    return std::sqrt(n / 2.0) * lower -
           std::sqrt((n + 1.0) / 2.0) * hermite_function(n + 1, x);
}

TestFunction::TestFunction(std::function<double(double)> f,
                           std::function<double(double)> df, std::string label)
    : f_(std::move(f)), df_(std::move(df)), label_(std::move(label)) {
    // Derivative consistency on 32 Chebyshev probes of [-4, 4].
    double fscale = 1e-12;
    for (int i = 0; i < 32; ++i) {
        double x = 4.0 * std::cos(kPi * (i + 0.5) / 32.0);
        fscale = std::max(fscale, std::abs(f_(x)));
    }
    const double h = 1e-6;
    for (int i = 0; i < 32; ++i) {
        double x = 4.0 * std::cos(kPi * (i + 0.5) / 32.0);
        double fd = (f_(x + h) - f_(x - h)) / (2.0 * h);
        double d = df_(x);
        if (std::abs(d - fd) > 1e-5 * std::max(std::abs(d), fscale))
            throw std::invalid_argument(
                "TestFunction '" + label_ +
                "': derivative disagrees with finite differences at x = " +
                std::to_string(x));
    }
}

TestFunction TestFunction::reflected() const {
    auto f = f_;
    auto df = df_;
    return TestFunction([f](double x) { return f(-x); },
                        [df](double x) { return -df(-x); },
                        label_ + " reflected");
}

TestFunction TestFunction::hermite(int n) {
    return TestFunction([n](double x) { return hermite_function(n, x); },
                        [n](double x) {
                            return hermite_function_derivative(n, x);
                        },
                        "hermite xi_" + std::to_string(n));
}

TestFunction TestFunction::combination(double a, const TestFunction& f,
                                       double b, const TestFunction& g) {
    auto ff = f.f_;
    auto gf = g.f_;
    auto fd = f.df_;
    auto gd = g.df_;
    return TestFunction(
        [a, b, ff, gf](double x) { return a * ff(x) + b * gf(x); },
        [a, b, fd, gd](double x) { return a * fd(x) + b * gd(x); },
        "combination");
}

KernelContext::KernelContext(Hurst H, QuadratureSpec spec)
    : H_(H), spec_(spec) {
    spec_.validate();
    const double h = H_.value();
    gj_kernel_ = make_gauss_jacobi(80, 0.0, h - 0.5);
    gj_kplus_ = make_gauss_jacobi(80, h - 0.5, 0.5 - h);

    // Calibrate c_H so that Var(B_1) = int_0^1 K(1,s)^2 ds = 1.  The
    // integrand has endpoint exponents s^{1-2H} and (1-s)^{2H-1}; the
    // strong one needs the exact endpoint offset.
    QuadratureSpec cal = spec_;
    cal.rel_tol = 1e-12;
    cal.abs_tol = 1e-14;
    cal.max_subdivisions = 13;
    double I = integrate_off(
        [&](double s, double, double off_r) { return sqr(bracket_off(1.0, s, off_r)); },
        0.0, 1.0, cal);
    c_h_ = 1.0 / std::sqrt(I);
}

// K_H(t,s)/c_H with the inner integral int_s^t u^{H-3/2}(u-s)^{H-1/2} du.
// Gauss-Jacobi handles s/t >= 0.02; below that its convergence degrades
// (the u = 0 singularity approaches the interval), so the substituted
// incomplete-Beta form s^{2H-1} int_{s/t}^1 y^{-2H}(1-y)^{H-1/2} dy is
// integrated instead, where both endpoint factors keep full precision.
double KernelContext::bracket_off(double t, double s, double tms) const {
    const double h = H_.value();
    if (!(s > 0.0) || !(tms > 0.0))
        throw std::domain_error("kernel requires 0 < s < t");
    const double lead = std::pow(t * tms / s, h - 0.5);
    if (h == 0.5) return lead;

    double inner;  // int_s^t u^{H-3/2} (u-s)^{H-1/2} du
    if (s / t >= 0.02) {
        const double half = 0.5 * tms;
        inner = std::pow(half, h + 0.5) * gj_kernel_.apply([&](double x) {
            return std::pow(s + half * (1.0 + x), h - 1.5);
        });
    } else {
        // substitute u = s/(1-w), then y = 1-w:
        // inner = s^{2H-1} int_{s/t}^1 y^{-2H} (1-y)^{H-1/2} dy.
        // On [a, 1/2] expand (1-y)^{H-1/2} binomially and integrate each
        // power in closed form (a can be exponentially small, so pointwise
        // y^{-2H} evaluations would overflow); the [1/2, 1] piece is tame.
        const double a = s / t;
        const double alpha = h - 0.5;
        auto stable_pow_diff = [](double lo, double hi, double q) {
            // (hi^q - lo^q)/q without cancellation or overflow
            if (q == 0.0) return std::log(hi / lo);
            const double qllo = q * std::log(lo);
            if (qllo < -700.0) return std::exp(q * std::log(hi)) / q;
            return std::exp(qllo) * std::expm1(q * std::log(hi / lo)) / q;
        };
        double Iy = 0.0;
        double coeff = 1.0;  // (-1)^j binom(H-1/2, j)
        for (int j = 0; j <= 64; ++j) {
            const double q = j + 1.0 - 2.0 * h;
            const double piece = coeff * stable_pow_diff(a, 0.5, q);
            Iy += piece;
            if (j > 4 && std::abs(piece) < 1e-16 * std::abs(Iy)) break;
            coeff *= (j - alpha) / (j + 1.0);
        }
        QuadratureSpec qs = spec_;
        qs.rel_tol = 1e-12;
        qs.abs_tol = 1e-15;
        Iy += integrate_off(
            [&](double y, double, double off_r) {
                return std::pow(y, -2.0 * h) * std::pow(off_r, h - 0.5);
            },
            0.5, 1.0, qs);
        inner = std::pow(s, 2.0 * h - 1.0) * Iy;
    }
    return lead - (h - 0.5) * std::pow(s, 0.5 - h) * inner;
}

double KernelContext::kernel_off(double t, double s, double tms) const {
    return c_h_ * bracket_off(t, s, tms);
}

double KernelContext::kernel(double t, double s, KernelOrder order) const {
    if (!(s > 0.0) || !(s < t))
        throw std::domain_error("kernel requires 0 < s < t");
    const double h = H_.value();
    if (order == KernelOrder::Value) return kernel_off(t, s, t - s);
    return c_h_ * (h - 0.5) * std::pow(t - s, h - 1.5) *
           std::pow(s / t, 0.5 - h);
}

double KernelContext::unit_variance_check() const {
    QuadratureSpec cal = spec_;
    cal.rel_tol = 1e-12;
    cal.abs_tol = 1e-14;
    cal.max_subdivisions = 13;
    return integrate_off(
        [&](double s, double, double off_r) {
            return sqr(kernel_off(1.0, s, off_r));
        },
        0.0, 1.0, cal);
}

double KernelContext::k_lower_impl(double t, double rel_tol) const {
    QuadratureSpec qs = spec_;
    qs.rel_tol = rel_tol;
    qs.abs_tol = rel_tol * 0.1;
    qs.max_subdivisions = 13;
    return integrate_off(
        [&](double s, double, double off_r) {
            return kernel_off(t, s, off_r);
        },
        0.0, t, qs);
}

double KernelContext::k_lower(double t) const {
    if (!(t > 0.0)) throw std::domain_error("k(t) requires t > 0");
    return k_lower_impl(t, 1e-12);
}

double KernelContext::k_prime_impl(double t, double rel_tol) const {
    const double h = std::min(1e-6 * std::max(t, 1.0), 0.5 * t);
    return (k_lower_impl(t + h, rel_tol) - k_lower_impl(t - h, rel_tol)) /
           (2.0 * h);
}

double KernelContext::k_prime(double t) const {
    if (!(t > 0.0)) throw std::domain_error("k'(t) requires t > 0");
    return k_prime_impl(t, 1e-13);
}

double KernelContext::k_prime_power_coefficient() const {
    // a with k'(t) ~ a t^{H-1/2}, fitted at t = 1.
    return k_prime(1.0);
}

double KernelContext::k_plus(const TestFunction& xi, double t) const {
    if (!(t > 0.0)) throw std::domain_error("K+ requires t > 0");
    const double h = H_.value();
    double value = k_prime(t) * xi(t);
    if (h != 0.5) {
        // int_0^t dK/dt(t,r)(xi(r)-xi(t)) dr with the (t-r)^{H-3/2}
        // singularity tamed to (t-r)^{H-1/2} by the difference quotient.
        const double xit = xi(t);
        double gj = gj_kplus_.apply([&](double x) {
            const double r = 0.5 * t * (1.0 + x);
            const double tmr = 0.5 * t * (1.0 - x);
            return (xi(r) - xit) / (-tmr);  // (xi(r)-xi(t))/(r-t)
        });
        value += c_h_ * (h - 0.5) * std::pow(t, h - 0.5) * (-0.5 * t) * gj;
    }
    return value;
}

double KernelContext::c_bound(double t, double rel_tol) const {
    const double h = H_.value();
    double deriv_term = 0.0;
    if (h != 0.5) {
        // int_0^t |dK/dt|(t-r) dr = |c_H(H-1/2)| t^{H+1/2} B(3/2-H, H+1/2)
        const double lb = std::lgamma(1.5 - h) + std::lgamma(h + 0.5) -
                          std::lgamma(2.0);
        deriv_term = std::abs(c_h_ * (h - 0.5)) * std::pow(t, h + 0.5) *
                     std::exp(lb);
    }
    return std::abs(k_prime_impl(t, rel_tol)) + deriv_term;
}

BoundFunctions KernelContext::bound_functions(double t, double eps0) const {
    if (!(t > 0.0)) throw std::domain_error("bound_functions requires t > 0");
    const double c_here = c_bound(t, 1e-11);
    double best = c_here;  // eps -> 0 limit point of the sliding average
    QuadratureSpec qs = spec_;
    qs.rel_tol = 1e-8;
    qs.abs_tol = 1e-10;
    for (int j = 0; j <= 20; ++j) {
        const double eps = eps0 * std::pow(2.0, -j);
        double avg = integrate([&](double s) { return c_bound(s, 1e-10); }, t,
                               t + eps, qs) /
                     eps;
        best = std::max(best, avg);
    }
    return {c_here, best, eps0};
}

double KernelContext::b_s_transform(const TestFunction& xi, double t) const {
    if (t == 0.0) return 0.0;
    if (!(t > 0.0)) throw std::domain_error("S(B_t) requires t >= 0");
    QuadratureSpec qs = spec_;
    qs.rel_tol = 1e-11;
    qs.abs_tol = 1e-13;
    return integrate_off(
        [&](double r, double, double off_r) {
            return kernel_off(t, r, off_r) * xi(r);
        },
        0.0, t, qs);
}

double KernelContext::increment_s_transform(const TestFunction& xi, double u,
                                            double eps) const {
    if (!(eps > 0.0)) throw std::domain_error("increment needs eps > 0");
    return b_s_transform(xi, u + eps) - b_s_transform(xi, u);
}

double KernelContext::increment_identity_residual(const TestFunction& xi,
                                                  double u, double eps) const {
    if (!(u >= 0.0) || !(eps > 0.0))
        throw std::domain_error("increment identity needs u >= 0, eps > 0");
    QuadratureSpec qs = spec_;
    qs.rel_tol = 1e-9;
    qs.abs_tol = 1e-11;
    const double lhs =
        integrate([&](double s) { return k_plus(xi, s); }, u, u + eps, qs);
    const double rhs = increment_s_transform(xi, u, eps);
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    if (scale < 1e-300) return 0.0;
    return std::abs(lhs - rhs) / scale;
}

double KernelContext::kernel_product_residual(double s, double r) const {
    const double h = H_.value();
    if (!(h > 0.5))
        throw std::domain_error(
            "kernel product identity is stated for H > 1/2");
    if (!(0.0 < s) || !(s < r))
        throw std::domain_error("kernel product identity needs 0 < s < r");
    if (!gj_kprod_) {
        gj_kprod_ = std::make_shared<const GaussJacobiRule>(
            make_gauss_jacobi(96, h - 1.5, 1.0 - 2.0 * h));
    }
    // int_0^s dK/ds(s,x) dK/dr(r,x) dx
    //   = c_H^2 (H-1/2)^2 (sr)^{H-1/2} (s/2)^{1/2-H}
    //     GJ[(1-x)^{H-3/2}(1+x)^{1-2H}; (r - s(1+x)/2)^{H-3/2}]
    const double pref = sqr(c_h_ * (h - 0.5)) * std::pow(s * r, h - 0.5) *
                        std::pow(0.5 * s, 0.5 - h);
    const double lhs = pref * gj_kprod_->apply([&](double x) {
        return std::pow(r - 0.5 * s * (1.0 + x), h - 1.5);
    });
    const double rhs = h * (2.0 * h - 1.0) * std::pow(r - s, 2.0 * h - 2.0);
    return std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs));
}

double KernelContext::s_transform(Family family, int k, const TestFunction& xi,
                                  double T, double eps) const {
    if (!(T > 0.0)) throw std::domain_error("s_transform requires T > 0");
    if (!(eps >= 0.0)) throw std::domain_error("s_transform requires eps >= 0");
    if (family == Family::HermiteVariation && k < 1)
        throw std::domain_error("s_transform hermite family requires k >= 1");

    QuadratureSpec outer = spec_;
    outer.rel_tol = 1e-8;
    outer.abs_tol = 1e-10;

    auto ipow = [](double x, int p) {
        double rv = 1.0;
        for (int i = 0; i < p; ++i) rv *= x;
        return rv;
    };

    const bool limit = eps == 0.0;
    switch (family) {
        case Family::HermiteVariation: {
            auto f = [&](double u) {
                double v = limit ? k_plus(xi, u)
                                 : increment_s_transform(xi, u, eps) / eps;
                return ipow(v, k);
            };
            return integrate(f, 0.0, T, outer);
        }
        case Family::Tilde:
        case Family::Breve: {
            const TestFunction xr = xi.reflected();
            if (family == Family::Tilde) {
                auto f = [&](double u) {
                    double first = u == 0.0 ? 0.0 : b_s_transform(xr, u);
                    double second = limit
                                        ? k_plus(xi, u)
                                        : increment_s_transform(xi, u, eps) /
                                              eps;
                    return first * second;
                };
                return integrate(f, 0.0, T, outer);
            }
            // Breve: the first factor averages the reflected increment
            // transform over [0,u].
            QuadratureSpec inner = spec_;
            inner.rel_tol = 1e-8;
            inner.abs_tol = 1e-10;
            auto f = [&](double u) {
                double first;
                if (limit) {
                    first = u == 0.0 ? 0.0 : b_s_transform(xr, u);
                } else {
                    auto g = [&](double v) {
                        return increment_s_transform(xr, v, eps) / eps;
                    };
                    first = u == 0.0 ? 0.0 : integrate(g, 0.0, u, inner);
                }
                double second = limit ? k_plus(xi, u)
                                      : increment_s_transform(xi, u, eps) /
                                            eps;
                return first * second;
            };
            return integrate(f, 0.0, T, outer);
        }
        case Family::Hat: {
            const TestFunction xr = xi.reflected();
            auto f = [&](double u) {
                double a = limit ? k_plus(xr, u)
                                 : increment_s_transform(xr, u, eps) / eps;
                double b = limit ? k_plus(xi, u)
                                 : increment_s_transform(xi, u, eps) / eps;
                return a * b;
            };
            return integrate(f, 0.0, T, outer);
        }
    }
    throw std::logic_error("unknown family");
}

}  // namespace hlim
