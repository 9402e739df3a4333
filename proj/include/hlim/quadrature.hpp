#pragma once

#include <functional>
#include <vector>

#include "hlim/common.hpp"

namespace hlim {

// Tolerances and cutoffs shared by the quadrature-backed constants.
// `tail_cutoff` is where improper integrals over the line switch to their
// analytic power-law tail; every kink of rho lies well inside [-2,2].
struct QuadratureSpec {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    double tail_cutoff = 50.0;  // >= 2
    int max_subdivisions = 12;  // doubling levels of the tanh-sinh rule

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
            throw std::domain_error("quadrature tolerances must be positive");
        if (!(tail_cutoff >= 2.0))
            throw std::domain_error("tail cutoff must be >= 2");
        if (max_subdivisions < 2 || max_subdivisions > 14)
            throw std::domain_error("max_subdivisions out of range [2,14]");
    }
};

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
};

using Fn1D = std::function<double(double)>;

// Integrand that additionally receives its exact distances to the interval
// endpoints (off_left = x-a, off_right = b-x, both computed without
// cancellation).  Required when a singular endpoint factor like
// (b-x)^{-0.8} must keep full relative precision at points exponentially
// close to the endpoint.
using Fn1DOff = std::function<double(double x, double off_left, double off_right)>;

// Double-exponential (tanh-sinh) rule on [a,b].  Robust against integrable
// endpoint singularities; the integrand is evaluated strictly inside (a,b).
QuadResult integrate_ts(const Fn1DOff& f, double a, double b,
                        const QuadratureSpec& spec);

// Throwing wrappers; numeric_error if the tolerance was not reached.
double integrate(const Fn1D& f, double a, double b, const QuadratureSpec& spec);
double integrate_off(const Fn1DOff& f, double a, double b,
                     const QuadratureSpec& spec);

// Splits [a,b] at the interior breakpoints (kinks) before integrating.
double integrate_with_breaks(const Fn1D& f, double a, double b,
                             std::vector<double> breaks,
                             const QuadratureSpec& spec);

// Gauss-Jacobi rule: integrates (1-x)^alpha (1+x)^beta f(x) over [-1,1]
// exactly for polynomial f up to degree 2n-1.  alpha, beta > -1.
struct GaussJacobiRule {
    double alpha = 0.0;
    double beta = 0.0;
    std::vector<double> nodes;    // in (-1,1), ascending
    std::vector<double> weights;  // positive, carry the weight function

    // Sum of w_j * f(x_j); equals int_{-1}^{1} (1-x)^a (1+x)^b f(x) dx.
    template <class F>
    double apply(F&& f) const {
        double acc = 0.0, comp = 0.0;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            double term = weights[j] * f(nodes[j]);
            double y = term - comp;
            double t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        }
        return acc;
    }
};

GaussJacobiRule make_gauss_jacobi(int n, double alpha, double beta);

}  // namespace hlim
