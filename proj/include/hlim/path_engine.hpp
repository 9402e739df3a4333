#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hlim/types.hpp"

namespace hlim {

// Uniform grid on [0, T_total] with n steps; functionals evaluated on a
// horizon T need T_total >= T + eps so increments are exact grid
// differences.
struct GridSpec {
    double T_total = 1.0;
    std::size_t n = 1024;

    double mesh() const { return T_total / static_cast<double>(n); }
    void validate() const {
        if (!(T_total > 0.0))
            throw std::domain_error("GridSpec: T_total must be positive");
        if (n < 2) throw std::domain_error("GridSpec: n >= 2 required");
    }
};

enum class GenMethod { CirculantEmbedding, Cholesky };

GenMethod parse_method(const std::string& name);
std::string method_name(GenMethod m);

struct FbmPath {
    Hurst H{0.5};
    GridSpec grid;
    std::vector<double> values;  // length n+1, values[0] == 0
    std::uint64_t seed = 0;
    GenMethod method = GenMethod::CirculantEmbedding;
};

// Two independent paths on a common grid, seeds derived from one base seed
// by derive_stream(seed, 1) and derive_stream(seed, 2).
struct PathPair {
    FbmPath first;
    FbmPath second;
};

// Stationary fractional Gaussian noise with autocovariance
// gamma(j) = delta^{2H} rho(H, j).  Circulant embedding pads the Toeplitz
// covariance into a power-of-two circulant diagonalized by the FFT and is
// exact; Cholesky factors the n x n covariance directly (oracle method,
// n <= 4096).  Deterministic: identical inputs give identical output.
std::vector<double> generate_fgn(const Hurst& H, const GridSpec& grid,
                                 std::uint64_t seed, GenMethod method);

FbmPath build_path(const Hurst& H, const GridSpec& grid, std::uint64_t seed,
                   GenMethod method);
PathPair build_path_pair(const Hurst& H, const GridSpec& grid,
                         std::uint64_t seed, GenMethod method);

// Path dumps: CSV with header `t,value`, or a binary file with the 32-byte
// header {magic "FBM1" u32, n u32, H f64, mesh f64, seed u64} followed by
// n+1 little-endian doubles.
void dump_path_csv(const FbmPath& path, const std::string& filename);
void dump_path_binary(const FbmPath& path, const std::string& filename);

}  // namespace hlim
