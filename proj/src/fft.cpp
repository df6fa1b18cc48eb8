#include "poiskern/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace poiskern {

void fft_inplace(std::vector<std::complex<double>>& data, int sign) {
    const std::size_t n = data.size();
    if (n == 0) return;
    if ((n & (n - 1)) != 0) throw std::invalid_argument("fft_inplace: length must be a power of two");

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                // refresh the twiddle periodically so rounding does not accumulate
                if ((k & 63u) == 0) w = std::polar(1.0, ang * static_cast<double>(k));
                std::complex<double> u = data[i + k];
                std::complex<double> t = data[i + k + len / 2] * w;
                data[i + k] = u + t;
                data[i + k + len / 2] = u - t;
                w *= wlen;
            }
        }
    }
}

}  // namespace poiskern
