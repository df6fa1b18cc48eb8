#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace poiskern {

// Piecewise Chebyshev interpolant of a smooth complex-valued function on
// [a,b].  Panels are split adaptively until the trailing Chebyshev
// coefficients drop below tol relative to the largest coefficient, so the
// function is only evaluated O(panels * degree) times however densely the
// interpolant is read afterwards.
class ChebInterpolant {
public:
    static constexpr int kDegree = 20;

    // tol is relative to the larger of the panel's own coefficient scale and
    // scale_floor.  Passing the function's global scale as scale_floor stops
    // panels in a decaying tail from chasing noise far below the level that
    // matters to the caller.
    ChebInterpolant() = default;
    ChebInterpolant(std::function<std::complex<double>(double)> f, double a, double b,
                    double tol = 1e-11, int max_depth = 22, double scale_floor = 0.0);

    std::complex<double> operator()(double x) const;
    double a() const { return a_; }
    double b() const { return b_; }
    int panel_count() const { return static_cast<int>(panels_.size()); }
    std::size_t eval_count() const { return evals_; }

    // Extend the domain to [a, b_new] by building panels to the right.
    void extend(const std::function<std::complex<double>(double)>& f, double b_new);

private:
    struct Panel {
        double lo = 0, hi = 0;
        std::vector<std::complex<double>> coef;  // Chebyshev coefficients
    };

    void build(const std::function<std::complex<double>(double)>& f, double lo, double hi, int depth);
    static Panel fit_panel(const std::function<std::complex<double>(double)>& f, double lo, double hi,
                           std::size_t& evals);
    double tail_error(const Panel& p) const;

    std::vector<Panel> panels_;  // ordered, contiguous
    double a_ = 0, b_ = 0;
    double tol_ = 1e-11;
    int max_depth_ = 22;
    double scale_floor_ = 0.0;
    std::size_t evals_ = 0;
};

}  // namespace poiskern
