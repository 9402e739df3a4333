#include "hlim/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace hlim {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Abscissa offset and weight of the tanh-sinh rule at parameter t:
//   sigma(t)  = fraction of the interval measured from the left endpoint,
//   sigma'(t) = dsigma/dt.
// sigma is computed in a cancellation-free form so that points exponentially
// close to the endpoints keep full relative precision.
struct TsPoint {
    double left_frac;   // sigma(t)   in (0,1)
    double right_frac;  // 1-sigma(t) in (0,1)
    double dweight;     // sigma'(t)
};

TsPoint ts_point(double t) {
    double u = 0.5 * kPi * std::sinh(t);
    double w = 0.25 * kPi * std::cosh(t) / sqr(std::cosh(u));
    double lf = 1.0 / (1.0 + std::exp(-2.0 * u));
    double rf = 1.0 / (1.0 + std::exp(2.0 * u));
    return {lf, rf, w};
}

// Beyond |t| ~ 6.56 the weights underflow double precision.
constexpr double kTsTMax = 6.56;

}  // namespace

QuadResult integrate_ts(const Fn1DOff& f, double a, double b,
                        const QuadratureSpec& spec) {
    if (!(b > a)) return {0.0, 0.0, true};
    const double len = b - a;

    // x may round onto an endpoint for nodes exponentially close to it; the
    // offsets stay exact there, so the node is kept (integrands with strong
    // endpoint singularities must use the offsets).
    auto eval = [&](double t) -> double {
        TsPoint p = ts_point(t);
        double off_l = len * p.left_frac;
        double off_r = len * p.right_frac;
        if (off_l <= 0.0 || off_r <= 0.0) return 0.0;
        double x = (p.left_frac <= 0.5) ? a + off_l : b - off_r;
        double v = f(x, off_l, off_r) * p.dweight;
        return std::isfinite(v) ? v : 0.0;
    };

    // Level 0: h = 1.
    double h = 1.0;
    double sum = eval(0.0);
    for (int k = 1; k * h <= kTsTMax; ++k) sum += eval(k * h) + eval(-k * h);
    double integral = sum * h * len;

    double prev = integral;
    double err = std::abs(integral);
    for (int level = 1; level <= spec.max_subdivisions; ++level) {
        h *= 0.5;
        double add = 0.0, comp = 0.0;
        for (double t = h; t <= kTsTMax; t += 2.0 * h) {
            double term = eval(t) + eval(-t);
            double y = term - comp;
            double s = add + y;
            comp = (s - add) - y;
            add = s;
        }
        sum += add;  // coarse nodes are reused, only odd multiples of h added
        integral = sum * h * len;
        err = std::abs(integral - prev);
        double goal = std::max(spec.abs_tol, spec.rel_tol * std::abs(integral));
        if (level >= 3 && err <= goal) return {integral, err, true};
        prev = integral;
    }
    double goal = std::max(spec.abs_tol, spec.rel_tol * std::abs(integral));
    return {integral, err, err <= goal * 16.0};
}

double integrate_off(const Fn1DOff& f, double a, double b,
                     const QuadratureSpec& spec) {
    QuadResult r = integrate_ts(f, a, b, spec);
    if (!r.converged)
        throw numeric_error("quadrature did not converge, achieved tolerance " +
                                std::to_string(r.error_estimate),
                            r.error_estimate);
    return r.value;
}

double integrate(const Fn1D& f, double a, double b,
                 const QuadratureSpec& spec) {
    return integrate_off([&](double x, double, double) { return f(x); }, a, b,
                         spec);
}

double integrate_with_breaks(const Fn1D& f, double a, double b,
                             std::vector<double> breaks,
                             const QuadratureSpec& spec) {
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    double total = 0.0;
    double lo = a;
    for (double pt : breaks) {
        if (pt <= lo || pt > b) continue;
        total += integrate(f, lo, std::min(pt, b), spec);
        lo = pt;
    }
    if (lo < b) total += integrate(f, lo, b, spec);
    return total;
}

namespace {

// Eigenvalues of a symmetric tridiagonal matrix by the implicit QL method
// (EISPACK tql1).  d = diagonal, e = off-diagonal (e[0] unused).
void tql_eigenvalues(std::vector<double>& d, std::vector<double>& e) {
    const int n = static_cast<int>(d.size());
    if (n == 1) return;
    for (int i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;

    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 1e-300 + 2.3e-16 * dd) break;
            }
            if (m != l) {
                if (++iter == 60)
                    throw numeric_error("tridiagonal QL failed to converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                for (int i = m - 1; i >= l; --i) {
                    double fi = s * e[i];
                    double bi = c * e[i];
                    r = std::hypot(fi, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = fi / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * bi;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - bi;
                }
                if (r == 0.0 && m - 1 >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    std::sort(d.begin(), d.end());
}

}  // namespace

GaussJacobiRule make_gauss_jacobi(int n, double alpha, double beta) {
    if (n < 1 || n > 256)
        throw std::domain_error("Gauss-Jacobi size out of range");
    if (!(alpha > -1.0) || !(beta > -1.0))
        throw std::domain_error("Gauss-Jacobi exponents must exceed -1");

    // Recurrence coefficients of the monic Jacobi polynomials.  The k = 0
    // diagonal and k = 1 off-diagonal use their cancelled forms: the
    // general expressions are 0/0 at alpha+beta = 0 resp. -1.
    const double ab = alpha + beta;
    std::vector<double> diag(n), offsq(n, 0.0);
    for (int k = 0; k < n; ++k) {
        if (k == 0) {
            diag[k] = (beta - alpha) / (ab + 2.0);
            continue;
        }
        diag[k] = (beta * beta - alpha * alpha) /
                  ((2.0 * k + ab) * (2.0 * k + ab + 2.0));
        if (k == 1) {
            offsq[k] = 4.0 * (1.0 + alpha) * (1.0 + beta) /
                       (sqr(ab + 2.0) * (ab + 3.0));
        } else {
            double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
            double den = sqr(2.0 * k + ab) * (2.0 * k + ab + 1.0) *
                         (2.0 * k + ab - 1.0);
            offsq[k] = num / den;
        }
    }
    // Zeroth moment of (1-x)^alpha (1+x)^beta on [-1,1].
    const double mu0 = std::exp((ab + 1.0) * std::log(2.0) +
                                std::lgamma(alpha + 1.0) +
                                std::lgamma(beta + 1.0) -
                                std::lgamma(ab + 2.0));

    std::vector<double> d = diag, e(n);
    for (int k = 1; k < n; ++k) e[k] = std::sqrt(offsq[k]);
    tql_eigenvalues(d, e);

    GaussJacobiRule rule;
    rule.alpha = alpha;
    rule.beta = beta;
    rule.nodes = d;
    rule.weights.resize(n);

    // Christoffel weights: w_j = 1 / sum_k p_k(x_j)^2 with p_k orthonormal.
    for (int j = 0; j < n; ++j) {
        double x = d[j];
        double pkm1 = 0.0;
        double pk = 1.0 / std::sqrt(mu0);
        double s = pk * pk;
        for (int k = 0; k + 1 < n; ++k) {
            double bk = std::sqrt(offsq[k + 1]);
            double pk1 = ((x - diag[k]) * pk - (k > 0 ? std::sqrt(offsq[k]) : 0.0) * pkm1) / bk;
            pkm1 = pk;
            pk = pk1;
            s += pk * pk;
        }
        rule.weights[j] = 1.0 / s;
    }
    return rule;
}

}  // namespace hlim
