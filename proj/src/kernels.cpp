#include "hlim/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace hlim::kernels {
namespace {

Backend detect() {
#if defined(HLIM_AVX2_BUILT)
    const char* env = std::getenv("HERMITE_LIMITS_SIMD");
    if (env) {
        if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
        if (std::strcmp(env, "avx2") == 0) return Backend::Avx2;
        // anything else (incl. "auto"): fall through to detection
    }
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return Backend::Avx2;
#endif
    return Backend::Scalar;
}

std::atomic<Backend> g_backend{detect()};

}  // namespace

const Ops& ops() {
#if defined(HLIM_AVX2_BUILT)
    if (g_backend.load(std::memory_order_relaxed) == Backend::Avx2)
        return avx2_ops();
#endif
    return scalar_ops();
}

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

void set_backend(Backend b) {
#if !defined(HLIM_AVX2_BUILT)
    b = Backend::Scalar;
#endif
    g_backend.store(b, std::memory_order_relaxed);
}

std::string backend_name() {
    return active_backend() == Backend::Avx2 ? "avx2" : "scalar";
}

}  // namespace hlim::kernels
