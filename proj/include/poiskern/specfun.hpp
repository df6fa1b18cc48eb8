#pragma once

#include <complex>

namespace poiskern {

// Principal branch of log Gamma(z) for Re z > 0, Lanczos rational
// approximation (g = 607/128, 15 terms); relative accuracy around 1e-13
// on the right half-plane.
std::complex<double> lgamma_complex(std::complex<double> z);

// |Gamma(z)|^2 without overflow concerns, Re z > 0.
double abs_gamma_squared(std::complex<double> z);

}  // namespace poiskern
