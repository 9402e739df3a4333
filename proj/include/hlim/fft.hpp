#pragma once

#include <complex>
#include <vector>

namespace hlim {

// In-place iterative radix-2 FFT; data.size() must be a power of two.
// sign = -1 gives the forward transform sum f_k e^{-2pi i jk/n},
// sign = +1 the unnormalized inverse.
void fft_pow2(std::vector<std::complex<double>>& data, int sign);

inline bool is_pow2(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }
std::size_t next_pow2(std::size_t n);

}  // namespace hlim
