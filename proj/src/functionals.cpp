#include "hlim/functionals.hpp"

#include <cmath>
#include <sstream>

#include "hlim/core_math.hpp"
#include "hlim/kernels.hpp"

namespace hlim {

std::size_t aligned_steps(const GridSpec& grid, double T, std::size_t m) {
    const double delta = grid.mesh();
    const double steps = T / delta;
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps) ||
        rounded < 1.0) {
        std::ostringstream os;
        os << "alignment error: T = " << T << " is not a multiple of the mesh "
           << delta;
        throw std::invalid_argument(os.str());
    }
    const auto L = static_cast<std::size_t>(rounded);
    if (L + m > grid.n) {
        std::ostringstream os;
        os << "alignment error: grid covers only " << grid.n
           << " steps, need " << L << " + " << m << " (T + eps)";
        throw std::invalid_argument(os.str());
    }
    return L;
}

namespace {

// Normalization for the sample given the regime of (kind, H).
void apply_normalization(FunctionalSample& s, const FunctionalKind& kind,
                         const Hurst& H) {
    const Regime regime = classify_regime(kind, H);
    double expo = 0.0;
    switch (kind.family) {
        case Family::HermiteVariation:
            expo = kind.k * (1.0 - H.value()) - 0.5;
            break;
        case Family::Tilde: expo = 0.5 - H.value(); break;
        case Family::Breve: expo = 0.5 - 2.0 * H.value(); break;
        case Family::Hat: expo = 1.5 - 2.0 * H.value(); break;
    }
    if (regime == Regime::CriticalLog) {
        s.normalization = Normalization::LogCritical;
        s.normalized_value = s.raw_value / std::sqrt(std::log(1.0 / s.eps));
    } else if (regime == Regime::GaussianCLT || regime == Regime::SStarOnly) {
        s.normalization = Normalization::PowerOfEps;
        s.exponent = expo;
        s.normalized_value = s.raw_value * std::pow(s.eps, expo);
    } else {
        s.normalization = Normalization::None;
        s.normalized_value = s.raw_value;
    }
}

}  // namespace

FunctionalSample hermite_variation(const FbmPath& path, int k, double T,
                                   EpsSpec eps) {
    const FunctionalKind kind = FunctionalKind::hermite(k);
    const GridSpec& grid = path.grid;
    const std::size_t L = aligned_steps(grid, T, eps.m);
    const double e = eps.eps(grid);
    const double h = path.H.value();

    const double inv_eps_h = std::pow(e, -h);
    const double sum = kernels::hermite_sum(path.values.data() + eps.m,
                                            path.values.data(), L, inv_eps_h,
                                            k);
    FunctionalSample s;
    s.kind = kind;
    s.hurst = h;
    s.T = T;
    s.eps = e;
    s.raw_value = std::pow(e, -k * (1.0 - h)) * grid.mesh() * sum;
    apply_normalization(s, kind, path.H);
    return s;
}

FunctionalSample bilinear_functional(const PathPair& pair, FunctionalKind kind,
                                     double T, EpsSpec eps) {
    if (!kind.bivariate())
        throw std::invalid_argument(
            "bilinear_functional expects tilde, breve or hat");
    const FbmPath& p1 = pair.first;
    const FbmPath& p2 = pair.second;
    if (p1.grid.n != p2.grid.n || p1.grid.T_total != p2.grid.T_total)
        throw std::invalid_argument("path pair lives on mismatched grids");

    const GridSpec& grid = p1.grid;
    const std::size_t L = aligned_steps(grid, T, eps.m);
    const double e = eps.eps(grid);
    const double delta = grid.mesh();
    const std::size_t m = eps.m;

    const double* b1 = p1.values.data();
    const double* b2 = p2.values.data();

    double raw = 0.0;
    switch (kind.family) {
        case Family::Tilde:
            raw = (delta / e) * kernels::dot_diff(b1, b2 + m, b2, L);
            break;
        case Family::Breve: {
            // prefix[i] = sum_{j<i} (B1_{v_j+eps} - B1_{v_j}), left sum
            std::vector<double> prefix(L);
            double acc = 0.0, comp = 0.0;
            for (std::size_t i = 0; i < L; ++i) {
                prefix[i] = acc + comp;
                double d = b1[i + m] - b1[i];
                double t = acc + d;
                if (std::abs(acc) >= std::abs(d))
                    comp += (acc - t) + d;
                else
                    comp += (d - t) + acc;
                acc = t;
            }
            raw = (delta * delta / (e * e)) *
                  kernels::dot_diff(prefix.data(), b2 + m, b2, L);
            break;
        }
        case Family::Hat:
            raw = (delta / (e * e)) *
                  kernels::dot_diff2(b1 + m, b1, b2 + m, b2, L);
            break;
        default: break;
    }

    FunctionalSample s;
    s.kind = kind;
    s.hurst = p1.H.value();
    s.T = T;
    s.eps = e;
    s.raw_value = raw;
    apply_normalization(s, kind, p1.H);
    return s;
}

double hat_decomposition_residual(const FbmPath& beta,
                                  const FbmPath& beta_tilde, double T,
                                  EpsSpec eps) {
    if (beta.grid.n != beta_tilde.grid.n ||
        beta.grid.T_total != beta_tilde.grid.T_total)
        throw std::invalid_argument("paths live on mismatched grids");
    const GridSpec& grid = beta.grid;
    const std::size_t L = aligned_steps(grid, T, eps.m);
    const double e = eps.eps(grid);
    const double h = beta.H.value();
    const double delta = grid.mesh();
    const std::size_t m = eps.m;
    const std::size_t N = grid.n + 1;

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    std::vector<double> bsum(N), bdiff(N);
    for (std::size_t i = 0; i < N; ++i) {
        bsum[i] = (beta.values[i] + beta_tilde.values[i]) * inv_sqrt2;
        bdiff[i] = (beta.values[i] - beta_tilde.values[i]) * inv_sqrt2;
    }

    const double lhs =
        std::pow(e, 1.5 - 2.0 * h) * (delta / (e * e)) *
        kernels::dot_diff2(bsum.data() + m, bsum.data(), bdiff.data() + m,
                           bdiff.data(), L);

    const double inv_eps_h = std::pow(e, -h);
    const double s1 = kernels::hermite_sum(beta.values.data() + m,
                                           beta.values.data(), L, inv_eps_h, 2);
    const double s2 =
        kernels::hermite_sum(beta_tilde.values.data() + m,
                             beta_tilde.values.data(), L, inv_eps_h, 2);
    const double rhs = 0.5 / std::sqrt(e) * delta * (s1 - s2);

    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    if (scale < 1e-300) return 0.0;
    return std::abs(lhs - rhs) / scale;
}

}  // namespace hlim
