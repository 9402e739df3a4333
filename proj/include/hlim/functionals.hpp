#pragma once

#include "hlim/path_engine.hpp"
#include "hlim/types.hpp"

namespace hlim {

// eps = m * mesh; functionals only accept grid-aligned eps so increments
// are exact grid differences.
struct EpsSpec {
    std::size_t m = 1;
    double eps(const GridSpec& grid) const {
        if (m < 1) throw std::invalid_argument("EpsSpec: m >= 1 required");
        return static_cast<double>(m) * grid.mesh();
    }
};

enum class Normalization { PowerOfEps, LogCritical, None };

struct FunctionalSample {
    FunctionalKind kind;
    double hurst = 0.5;
    double T = 1.0;
    double eps = 0.0;
    double raw_value = 0.0;
    double normalized_value = 0.0;
    Normalization normalization = Normalization::None;
    double exponent = 0.0;  // for PowerOfEps: normalized = raw * eps^exponent
};

// Left-endpoint Riemann sum of the k-th Hermite variation
//   eps^{-k(1-H)} int_0^T h_k((B_{u+eps}-B_u)/eps^H) du
// with compensated accumulation; the normalization follows the regime of
// (H, k).
FunctionalSample hermite_variation(const FbmPath& path, int k, double T,
                                   EpsSpec eps);

// Left-endpoint Riemann sums of the bivariate functionals on a path pair:
//   Tilde: int_0^T B^1_u (B^2_{u+eps}-B^2_u)/eps du
//   Breve: int_0^T [int_0^u (B^1_{v+eps}-B^1_v)/eps dv]
//                  (B^2_{u+eps}-B^2_u)/eps du
//   Hat:   int_0^T (B^1 incr/eps)(B^2 incr/eps) du
FunctionalSample bilinear_functional(const PathPair& pair, FunctionalKind kind,
                                     double T, EpsSpec eps);

// Pathwise decomposition check: builds B1 = (beta+beta~)/sqrt(2),
// B2 = (beta-beta~)/sqrt(2), evaluates eps^{3/2-2H} Hat(B1,B2) directly and
// as half the difference of the two order-2 Hermite variation sums of beta
// and beta~, and returns the relative difference.  This is an exact
// algebraic identity; the contract is <= 1e-12.
double hat_decomposition_residual(const FbmPath& beta,
                                  const FbmPath& beta_tilde, double T,
                                  EpsSpec eps);

// Number of grid steps covering [0,T); throws if T or eps is not aligned
// or the grid does not cover T + eps.
std::size_t aligned_steps(const GridSpec& grid, double T, std::size_t m);

}  // namespace hlim
