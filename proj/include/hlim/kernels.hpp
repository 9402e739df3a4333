#pragma once

#include <cstddef>
#include <string>

namespace hlim::kernels {

// Hot inner loops of the lab: compensated (Neumaier) reductions and Hermite
// polynomial sums over path arrays.  A scalar reference implementation is
// always available; on x86-64 an AVX2+FMA variant is selected at runtime.
// Variants agree to ~1e-14 relative (lane splitting changes rounding), and
// the equivalence is tested.  Selection is fixed per process, so results
// stay bit-reproducible for a given machine and build.
struct Ops {
    // sum_i a[i]
    double (*sum)(const double* a, std::size_t n);
    // sum_i a[i]*b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_i a[i]^2
    double (*sum_sq)(const double* a, std::size_t n);
    // sum_i h_k((hi[i]-lo[i]) * inv_scale), probabilists' Hermite h_k
    double (*hermite_sum)(const double* hi, const double* lo, std::size_t n,
                          double inv_scale, int k);
    // sum_i a[i]*(bhi[i]-blo[i])
    double (*dot_diff)(const double* a, const double* bhi, const double* blo,
                       std::size_t n);
    // sum_i (ahi[i]-alo[i])*(bhi[i]-blo[i])
    double (*dot_diff2)(const double* ahi, const double* alo,
                        const double* bhi, const double* blo, std::size_t n);
};

enum class Backend { Scalar, Avx2 };

const Ops& scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();
#endif

// Active table.  Chosen once from CPU features; HERMITE_LIMITS_SIMD
// (scalar|avx2|auto) overrides, set_backend() forces (tests).
const Ops& ops();
Backend active_backend();
void set_backend(Backend b);
std::string backend_name();

inline double sum(const double* a, std::size_t n) { return ops().sum(a, n); }
inline double dot(const double* a, const double* b, std::size_t n) {
    return ops().dot(a, b, n);
}
inline double sum_sq(const double* a, std::size_t n) {
    return ops().sum_sq(a, n);
}
inline double hermite_sum(const double* hi, const double* lo, std::size_t n,
                          double inv_scale, int k) {
    return ops().hermite_sum(hi, lo, n, inv_scale, k);
}
inline double dot_diff(const double* a, const double* bhi, const double* blo,
                       std::size_t n) {
    return ops().dot_diff(a, bhi, blo, n);
}
inline double dot_diff2(const double* ahi, const double* alo,
                        const double* bhi, const double* blo, std::size_t n) {
    return ops().dot_diff2(ahi, alo, bhi, blo, n);
}

}  // namespace hlim::kernels
