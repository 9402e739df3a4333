#pragma once

#include <functional>
#include <memory>
#include <string>

#include "hlim/quadrature.hpp"
#include "hlim/types.hpp"

namespace hlim {

// Orthonormal Hermite function xi_n (physicists' convention, stable
// three-term recurrence).  The convention is the one under which both the
// L2 orthonormality and the ladder derivative rule
//   xi_n' = sqrt(n/2) xi_{n-1} - sqrt((n+1)/2) xi_{n+1}
// hold literally.  n <= 30.
double hermite_function(int n, double x);
double hermite_function_derivative(int n, double x);

// Smooth, rapidly decreasing test function together with its derivative.
// Construction cross-checks the derivative against finite differences on
// 32 probe points.
class TestFunction {
public:
    TestFunction(std::function<double(double)> f,
                 std::function<double(double)> df, std::string label);

    double operator()(double x) const { return f_(x); }
    double derivative(double x) const { return df_(x); }
    const std::string& label() const { return label_; }

    TestFunction reflected() const;  // x -> f(-x)
    static TestFunction hermite(int n);
    static TestFunction combination(double a, const TestFunction& f, double b,
                                    const TestFunction& g);

private:
    std::function<double(double)> f_, df_;
    std::string label_;
};

enum class KernelOrder { Value, DtDerivative };
enum class IdentityKind { IncrementIdentity, KernelProduct };

struct BoundFunctions {
    double C = 0.0;
    double D = 0.0;
    double eps0 = 1.0;
};

// Volterra kernel of fractional Brownian motion with numerically calibrated
// normalization: c_H is fixed so that Var(B_1) = int_0^1 K(1,s)^2 ds = 1.
// Immutable after construction; evaluations are pure and thread-safe.
class KernelContext {
public:
    explicit KernelContext(Hurst H, QuadratureSpec spec = {});

    double hurst() const { return H_.value(); }
    const Hurst& hurst_index() const { return H_; }
    double c_h() const { return c_h_; }
    const QuadratureSpec& quadrature() const { return spec_; }

    // K_H(t,s) or its closed-form t-derivative, 0 < s < t.
    double kernel(double t, double s,
                  KernelOrder order = KernelOrder::Value) const;

    // Var(B_1) recomputed from the calibrated kernel (should be 1).
    double unit_variance_check() const;

    // k(t) = int_0^t K(t,s) ds and its derivative by central differences
    // of the quadrature values (step 1e-6 * max(t,1)).
    double k_lower(double t) const;
    double k_prime(double t) const;
    // Power-law cross-check: coefficient a in k'(t) ~ a t^{H-1/2}, fitted
    // numerically at t = 1.
    double k_prime_power_coefficient() const;

    // K+ xi(t) = k'(t) xi(t) + int_0^t dK/dt(t,r)(xi(r)-xi(t)) dr; the
    // singular integral uses Gauss-Jacobi nodes matched to the endpoint
    // exponents.
    double k_plus(const TestFunction& xi, double t) const;

    // C(t) = |k'(t)| + int_0^t |dK/dt(t,r)|(t-r) dr and the maximal
    // function D(t) = sup over eps in (0, eps0] of the sliding averages of
    // C; the sup is taken over a geometric eps grid together with its
    // eps -> 0 limit point C(t).
    BoundFunctions bound_functions(double t, double eps0 = 1.0) const;

    // S-transform of B_t: int_0^t K(t,r) xi(r) dr.
    double b_s_transform(const TestFunction& xi, double t) const;
    // S-transform of the increment B_{u+eps} - B_u.
    double increment_s_transform(const TestFunction& xi, double u,
                                 double eps) const;

    // Relative residuals of the two kernel identities.
    double increment_identity_residual(const TestFunction& xi, double u,
                                       double eps) const;
    double kernel_product_residual(double s, double r) const;  // needs H > 1/2

    // S-transforms of the four functionals; eps == 0 requests the limit
    // expression.  k >= 1 is accepted for the Hermite family here (the k=1
    // case is the smoke anchor at H = 1/2).
    double s_transform(Family family, int k, const TestFunction& xi, double T,
                       double eps) const;

private:
    Hurst H_;
    QuadratureSpec spec_;
    double c_h_ = 1.0;
    GaussJacobiRule gj_kernel_;  // weight (1+x)^{H-1/2} for the K integral
    GaussJacobiRule gj_kplus_;   // weight (1-x)^{H-1/2}(1+x)^{1/2-H}
    mutable std::shared_ptr<const GaussJacobiRule> gj_kprod_;  // lazy, H>1/2

    double bracket_off(double t, double s, double t_minus_s) const;
    double kernel_off(double t, double s, double t_minus_s) const;
    double k_prime_impl(double t, double rel_tol) const;
    double k_lower_impl(double t, double rel_tol) const;
    double c_bound(double t, double rel_tol) const;
};

}  // namespace hlim
