#pragma once

#include <string>

#include "hlim/quadrature.hpp"
#include "hlim/types.hpp"

namespace hlim {

// Probabilists' Hermite polynomial h_k, three-term recurrence.  k <= 50.
double hermite_poly(int k, double x);

// rho(x) = (|x+1|^{2H} + |x-1|^{2H} - 2|x|^{2H}) / 2, the unit-increment
// correlation of fractional Gaussian noise.
double rho(const Hurst& H, double x);

// rho_{eps,eta}(x) = (|x+eps|^{2H} + |x-eta|^{2H} - |x|^{2H}
//                     - |x+eps-eta|^{2H}) / 2
//                  = E[(B_{u+eps}-B_u)(B_{v+eta}-B_v)] at x = u-v.
double rho_eps_eta(const Hurst& H, double eps, double eta, double x);

// R_H(t,s) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.
double fbm_covariance(const Hurst& H, double t, double s);

// Psi(x) = 2|x|^{2H+2} - |x+1|^{2H+2} - |x-1|^{2H+2}; the double primitive
// of rho is -Psi/(2(2H+1)(2H+2)) up to affine terms.
double psi(const Hurst& H, double x);

// int_R rho(x)^k dx, finite iff H < 1 - 1/(2k); done on [0,A] with an
// analytic power-law tail, doubled by evenness.  Throws std::domain_error
// at or above the threshold.
double integral_rho_power(const Hurst& H, int k,
                          const QuadratureSpec& spec = {});

// c_{k,H} = H^k (2H-1)^k / ((Hk-k+1)(2Hk-2k+1)); requires H > 1 - 1/(2k).
double c_kh(const Hurst& H, int k);

// Variance constant of the critical-log regime of the k-th Hermite
// variation (without the factor T): 2 k! (1-1/(2k))^k (1-1/k)^k.
double hermite_critical_sigma2(int k);

// Closed-form limit (= 0 for H < 1/2) and raw truncated quadrature of
// int_0^inf rho(x) dx, both reported; they differ materially at any finite
// truncation, which the lab exposes rather than hides.
struct HalfLineRho {
    double closed_form_limit;
    double truncated_quadrature;  // int_0^A rho, no tail correction
    double cutoff;
};
HalfLineRho tilde_rho_half_line(const Hurst& H, const QuadratureSpec& spec = {});

// sigma^2 constants of the Gaussian regimes of the bivariate functionals.
double breve_sigma2(const Hurst& H, const QuadratureSpec& spec = {});  // H < 1/4
double hat_sigma2(const Hurst& H, const QuadratureSpec& spec = {});    // H < 3/4

enum class Regime { GaussianCLT, CriticalLog, L2Limit, SStarOnly };
std::string regime_name(Regime r);

// Regime + normalization + limiting constant for a (kind, H, T) query.
struct LimitPrediction {
    FunctionalKind kind;
    Regime regime = Regime::GaussianCLT;
    bool log_normalization = false;     // raw / sqrt(log(1/eps))
    double normalization_exponent = 0;  // otherwise raw * eps^exponent
    double limit_constant = 0;          // variance or L2 second moment, >= 0
    double t_exponent = 1;              // power of T carried by the constant
    std::string threshold_note;
};

Regime classify_regime(const FunctionalKind& kind, const Hurst& H);

LimitPrediction limit_prediction(const FunctionalKind& kind, const Hurst& H,
                                 double T, const QuadratureSpec& spec = {});

// Exact (quadrature-level) cross moment E[X_eps X_eta] of the requested
// functional at finite eps, eta.
double second_moment_exact(const FunctionalKind& kind, const Hurst& H,
                           double T, double eps, double eta,
                           const QuadratureSpec& spec = {});

// Direct iterated 2D quadrature for the Hat cross moment; the default path
// reduces to 1D over x = u-v.  Kept as an independent route for testing.
double hat_second_moment_2d(const Hurst& H, double T, double eps, double eta,
                            const QuadratureSpec& spec = {});

// Closed-form Lambda_{eps,eta}(u,u') = int_0^u int_0^{u'} rho_{eps,eta}(s-s')
// ds ds' assembled from double primitives of |x|^{2H}.
double lambda_eps_eta(const Hurst& H, double eps, double eta, double u,
                      double uprime);

}  // namespace hlim
