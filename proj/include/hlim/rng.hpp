#pragma once

#include <cstdint>

namespace hlim {

// Counter-based generator built on the splitmix64 finalizer.  The i-th
// output is a pure function of (seed, i), so replicas can be generated in
// any order, on any number of threads, with identical results on every
// platform.
//
// Derivation rules used throughout the lab (all integer arithmetic, so the
// streams are reproducible bit-for-bit):
//   word(seed, i)                 = mix64(seed + (i+1) * GOLDEN)
//   derive_stream(seed, tag)      = mix64(seed ^ mix64(tag + STREAM_SALT))
//   replica_seed(base, tag, idx)  = derive_stream(derive_stream(base, tag), idx)
inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
inline constexpr std::uint64_t kStreamSalt = 0xD1342543DE82EF95ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

inline std::uint64_t rng_word(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed + (index + 1) * kGolden);
}

inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag) {
    return mix64(seed ^ mix64(tag + kStreamSalt));
}

inline std::uint64_t replica_seed(std::uint64_t base_seed, std::uint64_t tag,
                                  std::uint64_t replica_index) {
    return derive_stream(derive_stream(base_seed, tag), replica_index);
}

// Uniform in the open interval (0,1): 53-bit mantissa, offset keeps 0 out.
inline double rng_uniform(std::uint64_t seed, std::uint64_t index) {
    return static_cast<double>(rng_word(seed, index) >> 11) * 0x1.0p-53 +
           0x1.0p-54;
}

// Standard normal draw i from the cosine branch of Box-Muller, consuming
// uniforms 2i and 2i+1.  Random access, no retained state.
double rng_normal_bm(std::uint64_t seed, std::uint64_t index);

// Standard normal via the inverse CDF (Wichura's AS241, double precision).
double inverse_normal_cdf(double p);
double rng_normal_icdf(std::uint64_t seed, std::uint64_t index);

// Standard normal CDF.
double normal_cdf(double x);

}  // namespace hlim
