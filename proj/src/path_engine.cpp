#include "hlim/path_engine.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>

#include "hlim/common.hpp"
#include "hlim/core_math.hpp"
#include "hlim/fft.hpp"
#include "hlim/rng.hpp"

namespace hlim {

GenMethod parse_method(const std::string& name) {
    if (name == "circulant") return GenMethod::CirculantEmbedding;
    if (name == "cholesky") return GenMethod::Cholesky;
    throw std::invalid_argument("unknown generation method: " + name);
}

std::string method_name(GenMethod m) {
    return m == GenMethod::CirculantEmbedding ? "circulant" : "cholesky";
}

namespace {

std::vector<double> fgn_autocov(const Hurst& H, double delta, std::size_t m) {
    std::vector<double> g(m + 1);
    const double scale = std::pow(delta, 2.0 * H.value());
    for (std::size_t j = 0; j <= m; ++j)
        g[j] = scale * rho(H, static_cast<double>(j));
    return g;
}

std::vector<double> fgn_circulant(const Hurst& H, const GridSpec& grid,
                                  std::uint64_t seed) {
    const std::size_t n = grid.n;
    const std::size_t M = 2 * next_pow2(n);
    const std::size_t half = M / 2;

    auto gamma = fgn_autocov(H, grid.mesh(), half);
    std::vector<std::complex<double>> c(M);
    c[0] = gamma[0];
    for (std::size_t j = 1; j <= half; ++j) {
        c[j] = gamma[j];
        if (j < half) c[M - j] = gamma[j];
    }
    fft_pow2(c, -1);

    double max_eig = 0.0, min_eig = 0.0;
    for (auto& z : c) {
        max_eig = std::max(max_eig, z.real());
        min_eig = std::min(min_eig, z.real());
    }
    std::size_t clamped = 0;
    for (auto& z : c) {
        double lam = z.real();
        if (lam < 0.0) {
            if (lam < -1e-10 * max_eig)
                throw numeric_error(
                    "circulant embedding failure: eigenvalue " +
                    std::to_string(lam) + " below -1e-10 * max eigenvalue");
            lam = 0.0;
            ++clamped;
        }
        z = lam;
    }
    if (clamped > 0)
        std::fprintf(stderr,
                     "warning: circulant embedding clamped %zu tiny negative "
                     "eigenvalues (min %.3e, max %.3e)\n",
                     clamped, min_eig, max_eig);

    // Spectral coefficients: real Gaussians at j = 0 and M/2, complex pairs
    // elsewhere with conjugate symmetry.  Draw order is fixed: normal 0 for
    // j=0, normal 1 for j=M/2, pair (2j, 2j+1) for 0 < j < M/2.
    std::vector<std::complex<double>> b(M);
    b[0] = std::sqrt(c[0].real()) * rng_normal_bm(seed, 0);
    b[half] = std::sqrt(c[half].real()) * rng_normal_bm(seed, 1);
    for (std::size_t j = 1; j < half; ++j) {
        const double amp = std::sqrt(0.5 * c[j].real());
        const double re = amp * rng_normal_bm(seed, 2 * j);
        const double im = amp * rng_normal_bm(seed, 2 * j + 1);
        b[j] = {re, im};
        b[M - j] = {re, -im};
    }
    fft_pow2(b, +1);

    const double norm = 1.0 / std::sqrt(static_cast<double>(M));
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = b[i].real() * norm;
    return out;
}

// Cached Cholesky factor of the fGn covariance; factorization is O(n^3) and
// reused across replicas with the same (H, delta, n).
struct CholKey {
    double h;
    double delta;
    std::size_t n;
    bool operator==(const CholKey& o) const {
        return h == o.h && delta == o.delta && n == o.n;
    }
};

const std::vector<double>& cholesky_factor(const Hurst& H,
                                           const GridSpec& grid) {
    static std::mutex mu;
    static std::vector<std::pair<CholKey, std::vector<double>>> cache;
    CholKey key{H.value(), grid.mesh(), grid.n};

    std::lock_guard<std::mutex> lock(mu);
    for (auto& kv : cache)
        if (kv.first == key) return kv.second;

    const std::size_t n = grid.n;
    auto gamma = fgn_autocov(H, grid.mesh(), n - 1);
    std::vector<double> L(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = gamma[i - j];
            for (std::size_t k = 0; k < j; ++k)
                s -= L[i * n + k] * L[j * n + k];
            if (i == j) {
                if (s <= 0.0)
                    throw numeric_error(
                        "fGn covariance lost positive definiteness in "
                        "Cholesky at pivot " +
                        std::to_string(i));
                L[i * n + i] = std::sqrt(s);
            } else {
                L[i * n + j] = s / L[j * n + j];
            }
        }
    }
    if (cache.size() >= 8) cache.erase(cache.begin());
    cache.emplace_back(key, std::move(L));
    return cache.back().second;
}

std::vector<double> fgn_cholesky(const Hurst& H, const GridSpec& grid,
                                 std::uint64_t seed) {
    const std::size_t n = grid.n;
    if (n > 4096)
        throw std::domain_error(
            "Cholesky generation is capped at n <= 4096 (oracle method)");
    const auto& L = cholesky_factor(H, grid);
    std::vector<double> z(n), out(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = rng_normal_icdf(seed, i);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        const double* row = L.data() + i * n;
        for (std::size_t k = 0; k <= i; ++k) s += row[k] * z[k];
        out[i] = s;
    }
    return out;
}

}  // namespace

std::vector<double> generate_fgn(const Hurst& H, const GridSpec& grid,
                                 std::uint64_t seed, GenMethod method) {
    grid.validate();
    return method == GenMethod::CirculantEmbedding
               ? fgn_circulant(H, grid, seed)
               : fgn_cholesky(H, grid, seed);
}

FbmPath build_path(const Hurst& H, const GridSpec& grid, std::uint64_t seed,
                   GenMethod method) {
    auto incr = generate_fgn(H, grid, seed, method);
    FbmPath p{H, grid, {}, seed, method};
    p.values.resize(grid.n + 1);
    p.values[0] = 0.0;
    for (std::size_t i = 0; i < grid.n; ++i)
        p.values[i + 1] = p.values[i] + incr[i];
    return p;
}

PathPair build_path_pair(const Hurst& H, const GridSpec& grid,
                         std::uint64_t seed, GenMethod method) {
    const std::uint64_t s1 = derive_stream(seed, 1);
    const std::uint64_t s2 = derive_stream(seed, 2);
    return {build_path(H, grid, s1, method), build_path(H, grid, s2, method)};
}

void dump_path_csv(const FbmPath& path, const std::string& filename) {
    std::ofstream out(filename);
    if (!out) throw std::runtime_error("cannot open " + filename);
    out << "t,value\n";
    char line[80];
    const double delta = path.grid.mesh();
    for (std::size_t i = 0; i < path.values.size(); ++i) {
        std::snprintf(line, sizeof line, "%.17g,%.17g\n",
                      static_cast<double>(i) * delta, path.values[i]);
        out << line;
    }
}

void dump_path_binary(const FbmPath& path, const std::string& filename) {
    std::ofstream out(filename, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + filename);
    char header[32];
    std::memcpy(header, "FBM1", 4);
    std::uint32_t n32 = static_cast<std::uint32_t>(path.grid.n);
    double h = path.H.value();
    double delta = path.grid.mesh();
    std::uint64_t seed = path.seed;
    std::memcpy(header + 4, &n32, 4);
    std::memcpy(header + 8, &h, 8);
    std::memcpy(header + 16, &delta, 8);
    std::memcpy(header + 24, &seed, 8);
    out.write(header, sizeof header);
    out.write(reinterpret_cast<const char*>(path.values.data()),
              static_cast<std::streamsize>(path.values.size() *
                                           sizeof(double)));
}

}  // namespace hlim
