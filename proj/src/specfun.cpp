#include "poiskern/specfun.hpp"

#include <cmath>
#include <stdexcept>

namespace poiskern {

namespace {

// Lanczos coefficients for g = 607/128 (Godfrey's 15-term set).
constexpr double kLanczosG = 607.0 / 128.0;
constexpr double kLanczos[15] = {
    0.99999999999999709182,     57.156235665862923517,     -59.597960355475491248,
    14.136097974741747174,      -0.49191381609762019978,   0.33994649984811888699e-4,
    0.46523628927048575665e-4,  -0.98374475304879564677e-4, 0.15808870322491248884e-3,
    -0.21026444172410488319e-3, 0.21743961811521264320e-3, -0.16431810653676389022e-3,
    0.84418223983852743293e-4,  -0.26190838401581408670e-4, 0.36899182659531622704e-5,
};

}  // namespace

std::complex<double> lgamma_complex(std::complex<double> z) {
    if (z.real() <= 0.0) throw std::invalid_argument("lgamma_complex: requires Re z > 0");
    std::complex<double> sum = kLanczos[0];
    for (int k = 1; k < 15; ++k) sum += kLanczos[k] / (z + static_cast<double>(k - 1));
    std::complex<double> base = z + (kLanczosG - 0.5);
    return 0.5 * std::log(2.0 * M_PI) + (z - 0.5) * std::log(base) - base + std::log(sum);
}

double abs_gamma_squared(std::complex<double> z) {
    return std::exp(2.0 * lgamma_complex(z).real());
}

}  // namespace poiskern
