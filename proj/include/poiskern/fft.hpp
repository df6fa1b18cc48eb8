#pragma once

#include <complex>
#include <vector>

namespace poiskern {

// In-place radix-2 complex FFT.  sign = -1 gives the forward transform
//   X_k = sum_n x_n exp(-2*pi*i*n*k/N),
// sign = +1 the unnormalised inverse.  N must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& data, int sign);

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace poiskern
