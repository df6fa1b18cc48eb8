#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace poiskern {

inline std::vector<double> linspace(double a, double b, int n) {
    if (n < 2) throw std::invalid_argument("linspace: need n >= 2");
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = a + (b - a) * i / (n - 1);
    x.back() = b;
    return x;
}

inline std::vector<double> logspace(double a, double b, int n) {
    if (a <= 0 || b <= 0) throw std::invalid_argument("logspace: endpoints must be positive");
    std::vector<double> x = linspace(std::log(a), std::log(b), n);
    for (double& v : x) v = std::exp(v);
    x.front() = a;
    x.back() = b;
    return x;
}

// Geometric grid x0, x0*r, x0*r^2, ... up to (at least) x1.
inline std::vector<double> geometric_grid(double x0, double x1, double ratio) {
    if (x0 <= 0 || x1 <= x0) throw std::invalid_argument("geometric_grid: need 0 < x0 < x1");
    if (ratio <= 1.0) throw std::invalid_argument("geometric_grid: ratio must exceed 1");
    std::vector<double> x;
    for (double v = x0; v < x1 * (1 + 1e-12); v *= ratio) x.push_back(v);
    if (x.size() < 2) x.push_back(x1);
    return x;
}

}  // namespace poiskern
