#include "poiskern/cheb.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace poiskern {

namespace {

// Chebyshev-Lobatto nodes and the cosine transform to coefficients, done
// directly; the degree is small enough that O(n^2) is irrelevant.
std::vector<std::complex<double>> values_to_coeffs(const std::vector<std::complex<double>>& vals) {
    const int n = static_cast<int>(vals.size()) - 1;
    std::vector<std::complex<double>> c(n + 1);
    for (int k = 0; k <= n; ++k) {
        std::complex<double> acc = 0.5 * (vals[0] + (k % 2 ? -1.0 : 1.0) * vals[n]);
        for (int j = 1; j < n; ++j) acc += vals[j] * std::cos(M_PI * j * k / n);
        c[k] = acc * (2.0 / n);
    }
    c[0] *= 0.5;
    c[n] *= 0.5;
    return c;
}

}  // namespace

ChebInterpolant::Panel ChebInterpolant::fit_panel(const std::function<std::complex<double>(double)>& f,
                                                  double lo, double hi, std::size_t& evals) {
    Panel p;
    p.lo = lo;
    p.hi = hi;
    std::vector<std::complex<double>> vals(kDegree + 1);
    for (int j = 0; j <= kDegree; ++j) {
        double t = std::cos(M_PI * j / kDegree);  // 1 .. -1
        double x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t;
        vals[j] = f(x);
        ++evals;
    }
    p.coef = values_to_coeffs(vals);
    return p;
}

double ChebInterpolant::tail_error(const Panel& p) const {
    double scale = scale_floor_;
    for (const auto& c : p.coef) scale = std::max(scale, std::abs(c));
    if (scale == 0) return 0;
    double tail = 0;
    for (int k = kDegree - 2; k <= kDegree; ++k) tail = std::max(tail, std::abs(p.coef[k]));
    return tail / scale;
}

void ChebInterpolant::build(const std::function<std::complex<double>(double)>& f, double lo, double hi,
                            int depth) {
    Panel p = fit_panel(f, lo, hi, evals_);
    if (tail_error(p) > tol_ && depth < max_depth_) {
        double mid = 0.5 * (lo + hi);
        build(f, lo, mid, depth + 1);
        build(f, mid, hi, depth + 1);
    } else {
        panels_.push_back(std::move(p));
    }
}

ChebInterpolant::ChebInterpolant(std::function<std::complex<double>(double)> f, double a, double b,
                                 double tol, int max_depth, double scale_floor)
    : a_(a), b_(b), tol_(tol), max_depth_(max_depth), scale_floor_(scale_floor) {
    if (!(b > a)) throw std::invalid_argument("ChebInterpolant: need a < b");
    build(f, a, b, 0);
}

void ChebInterpolant::extend(const std::function<std::complex<double>(double)>& f, double b_new) {
    if (b_new <= b_) return;
    // grow in octaves so panel sizes stay commensurate with position
    double lo = b_;
    while (lo < b_new) {
        double hi = std::min(b_new, std::max(lo * 2.0, lo + (b_ - a_)));
        build(f, lo, hi, 0);
        lo = hi;
    }
    b_ = b_new;
}

std::complex<double> ChebInterpolant::operator()(double x) const {
    if (panels_.empty()) throw std::logic_error("ChebInterpolant: empty");
    if (x <= panels_.front().lo) x = panels_.front().lo;
    if (x >= b_) x = b_;
    // panels are ordered by construction only within each build() call; keep a
    // sorted view via binary search over lo
    auto it = std::upper_bound(panels_.begin(), panels_.end(), x,
                               [](double v, const Panel& p) { return v < p.lo; });
    if (it != panels_.begin()) --it;
    while (it + 1 != panels_.end() && x > it->hi) ++it;
    const Panel& p = *it;
    double t = (2.0 * x - (p.lo + p.hi)) / (p.hi - p.lo);
    t = std::clamp(t, -1.0, 1.0);
    // Clenshaw
    std::complex<double> b1 = 0, b2 = 0;
    for (int k = kDegree; k >= 1; --k) {
        std::complex<double> tmp = 2.0 * t * b1 - b2 + p.coef[k];
        b2 = b1;
        b1 = tmp;
    }
    return t * b1 - b2 + p.coef[0];
}

}  // namespace poiskern
