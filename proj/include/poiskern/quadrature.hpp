#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <functional>
#include <stdexcept>

namespace poiskern {

// Integrate f over [a,b].  tanh_sinh tolerates integrable endpoint
// singularities, which is what the coefficient densities need near 0.
template <class F>
double integrate(const F& f, double a, double b, double tol = 1e-13) {
    if (!(b > a)) throw std::invalid_argument("integrate: need a < b");
    boost::math::quadrature::tanh_sinh<double> quad;
    double err = 0, l1 = 0;
    double val = quad.integrate(f, a, b, tol, &err, &l1);
    if (!std::isfinite(val))
        throw std::runtime_error("integrate: non-finite result (coefficient not locally integrable?)");
    return val;
}

// Integrate f over [a, infinity).
template <class F>
double integrate_to_inf(const F& f, double a, double tol = 1e-12) {
    boost::math::quadrature::exp_sinh<double> quad;
    auto shifted = [&](double t) { return f(a + t); };
    double err = 0;
    double val = quad.integrate(shifted, tol, &err);
    if (!std::isfinite(val)) throw std::runtime_error("integrate_to_inf: non-finite result");
    return val;
}

// Fixed-order Gauss-Legendre on [a,b]; cheap building block for panel sums
// of smooth oscillatory integrands.
template <class F>
auto gauss16(const F& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 16>::integrate(f, a, b);
}

}  // namespace poiskern
