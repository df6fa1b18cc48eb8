#include "poiskern/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "poiskern/fft.hpp"

namespace poiskern {

namespace {

using Complex = std::complex<double>;

constexpr std::size_t kMaxFftSize = std::size_t{1} << 24;
constexpr double kOversample = 2.0;  // x-grid points per Nyquist interval

double pick_smoothing(const KernelSymbol& sym, const KernelOptions& opts) {
    if (opts.smoothing_t >= 0.0) return opts.smoothing_t;
    if (sym.tail_abs <= opts.xi_tol) return 0.0;
    return 10.0 / (sym.xi_cutoff * sym.xi_cutoff);
}

Complex frequency_multiplier(double xi, double t, int derivative) {
    Complex m(std::exp(-t * xi * xi), 0.0);
    for (int k = 0; k < derivative; ++k) m *= Complex(0.0, xi);
    return m;
}

// Synthesis of (1/2pi) int e^{i xi x} symbol(xi) dxi over [-cutoff, cutoff]
// via the Hermitian extension symbol(-xi) = conj(symbol(xi)).  The discrete
// sum equals the periodisation of the true integral with period n*dx, so the
// error is controlled by the kernel tails beyond the padded window, not by
// the frequency step.
KernelEstimate invert_grid(const std::function<Complex(double)>& symbol, double cutoff, double y,
                           double t, int derivative, double window, double pad) {
    double dx = M_PI / (kOversample * cutoff);
    auto fft_size = [&](double step) {
        double span = std::max(pad * 2.0 * window, 8.0 * step);
        return next_pow2(static_cast<std::size_t>(std::ceil(span / step)));
    };
    std::size_t n = fft_size(dx);
    if (n > kMaxFftSize) {
        dx = M_PI / cutoff;  // drop to critical sampling before giving up
        n = fft_size(dx);
        if (n > kMaxFftSize)
            throw SolverError("kernel inversion: window and frequency cutoff need an FFT beyond the size cap");
    }
    double dxi = 2.0 * M_PI / (static_cast<double>(n) * dx);
    std::size_t kcut = static_cast<std::size_t>(std::floor(cutoff / dxi * (1.0 + 1e-12)));
    kcut = std::min(kcut, n / 2 - 1);

    std::vector<Complex> data(n, Complex(0.0, 0.0));
    for (std::size_t k = 0; k <= kcut; ++k) {
        double xi = dxi * static_cast<double>(k);
        Complex s = symbol(xi) * frequency_multiplier(xi, t, derivative);
        if (k == kcut) s *= 0.5;  // trapezoid end weight at the spectral cut
        data[k] = s;
        if (k > 0) data[n - k] = std::conj(s);
    }
    double dc = data[0].real();
    fft_inplace(data, +1);

    std::size_t half_pts = std::min(static_cast<std::size_t>(std::floor(window / dx)), n / 2 - 1);
    std::size_t m = 2 * half_pts + 1;

    KernelEstimate est;
    est.y = y;
    est.derivative = derivative;
    est.dx = dx;
    est.x0 = -dx * static_cast<double>(half_pts);
    est.smoothing_t = t;
    est.xi_cutoff = dxi * static_cast<double>(kcut);
    est.mass = dc;
    est.values.resize(m);
    double scale = dxi / (2.0 * M_PI);
    double peak = 0.0, max_imag = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        std::ptrdiff_t shift =
            static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(half_pts);
        std::size_t src = static_cast<std::size_t>(
            (shift + static_cast<std::ptrdiff_t>(n)) % static_cast<std::ptrdiff_t>(n));
        Complex v = data[src] * scale;
        est.values[j] = v.real();
        peak = std::max(peak, std::abs(v.real()));
        max_imag = std::max(max_imag, std::abs(v.imag()));
    }
    est.imag_residual = peak > 0.0 ? max_imag / peak : max_imag;

    double edge = 0.0;
    double rim = 0.95 * window;
    for (std::size_t j = 0; j < m; ++j)
        if (std::abs(est.x_at(j)) >= rim) edge = std::max(edge, std::abs(est.values[j]));
    est.boundary_ratio = peak > 0.0 ? edge / peak : 0.0;

    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < m; ++j) acc += 0.5 * (est.values[j] + est.values[j + 1]) * dx;
    est.window_mass = acc;
    return est;
}

}  // namespace

double KernelEstimate::value(double x) const {
    if (values.empty() || dx <= 0.0) return 0.0;
    double s = (x - x0) / dx;
    if (s < 0.0 || s > static_cast<double>(values.size() - 1)) return 0.0;
    std::size_t j = std::min(static_cast<std::size_t>(s), values.size() - 2);
    double f = s - static_cast<double>(j);
    return values[j] * (1.0 - f) + values[j + 1] * f;
}

double KernelEstimate::cdf(double x) const {
    if (values.empty()) return 0.0;
    if (x <= x0) return 0.0;
    double acc = 0.0;
    std::size_t j = 0;
    while (j + 1 < values.size() && x_at(j + 1) <= x) {
        acc += 0.5 * (values[j] + values[j + 1]) * dx;
        ++j;
    }
    if (j + 1 < values.size()) {
        double w = x - x_at(j);
        acc += 0.5 * (values[j] + value(x)) * w;
    }
    return acc;
}

KernelEstimate KernelEstimate::mirrored() const {
    KernelEstimate r = *this;
    r.x0 = -x_hi();
    std::reverse(r.values.begin(), r.values.end());
    if (derivative % 2 == 1)
        for (double& v : r.values) v = -v;
    return r;
}

KernelSymbol build_symbol(const OperatorSpec& spec, double y, const KernelOptions& opts) {
    spec.validate();
    if (!(y > 0.0) || !std::isfinite(y))
        throw std::invalid_argument("kernel slice height must be positive");
    if (std::isfinite(spec.R) && y >= spec.R)
        throw std::invalid_argument("kernel slice height must lie below the top boundary");

    SolveOptions sopts = opts.solve;
    sopts.eval_points.push_back(y);
    sopts.require_psi = false;  // only the solution at y is consumed here
    std::function<Complex(double)> phi = [&spec, sopts, y](double xi) {
        return solve_bounded(spec, Complex(xi, 0.0), sopts).value(y);
    };

    KernelSymbol sym;
    sym.y = y;
    sym.spec_hash = spec.hash();
    sym.mass = phi(0.0).real();

    // tail_abs records the raw symbol size at the cut; when the caller has
    // already committed to a smoothing time the search only needs the damped
    // tail to be negligible, which matters for slices whose symbol plateaus
    // (no diffusion below the slice leaves a point mass at the origin).  The
    // derivative weight xi^n enters too: truncating where the weighted
    // integrand is still large leaves ringing across the whole slice.
    const double t_assumed = std::max(0.0, opts.smoothing_t);
    auto damped = [t_assumed, n = opts.derivative](double c, double raw) {
        return raw * std::pow(c, static_cast<double>(n)) * std::exp(-t_assumed * c * c);
    };
    double cutoff = 16.0;
    double tail = std::abs(phi(cutoff));
    while (damped(cutoff, tail) > opts.xi_tol && cutoff < opts.xi_max) {
        cutoff *= 2.0;
        tail = std::abs(phi(cutoff));
    }
    sym.xi_cutoff = cutoff;
    sym.tail_abs = tail;
    const double scale = std::max(std::abs(sym.mass), tail);
    sym.interp = std::make_shared<ChebInterpolant>(phi, 0.0, cutoff, opts.cheb_tol, 22, scale);
    return sym;
}

KernelEstimate invert_symbol(const KernelSymbol& sym, const KernelOptions& opts) {
    if (!sym.interp) throw std::invalid_argument("kernel symbol is empty");
    double t = pick_smoothing(sym, opts);
    std::function<Complex(double)> lookup = [&sym](double xi) { return sym(xi); };
    KernelEstimate est;
    for (double window = opts.min_window;; window *= 2.0) {
        est = invert_grid(lookup, sym.xi_cutoff, sym.y, t, opts.derivative, window,
                          opts.pad_factor);
        if (est.boundary_ratio <= opts.window_tol || 2.0 * window > opts.max_window) break;
    }
    est.spec_hash = sym.spec_hash;
    if (opts.derivative == 0) est.mass = sym.mass;
    return est;
}

KernelEstimate build_kernel(const OperatorSpec& spec, double y, const KernelOptions& opts) {
    return invert_symbol(build_symbol(spec, y, opts), opts);
}

KernelEstimate invert_samples(const std::vector<Complex>& phi, double dxi, double y, double t,
                              double x_window, int derivative) {
    if (phi.size() < 2 || !(dxi > 0.0))
        throw std::invalid_argument("need at least two symbol samples on a positive step");
    double cutoff = dxi * static_cast<double>(phi.size() - 1);
    std::function<Complex(double)> lookup = [&phi, dxi](double xi) {
        double s = xi / dxi;
        std::size_t j = std::min(static_cast<std::size_t>(s), phi.size() - 2);
        double f = s - static_cast<double>(j);
        return phi[j] * (1.0 - f) + phi[j + 1] * f;
    };
    return invert_grid(lookup, cutoff, y, t, derivative, x_window, 4.0);
}

KernelEstimate sample_function(const std::function<double(double)>& f, double x_lo, double x_hi,
                               std::size_t n) {
    if (n < 2 || !(x_hi > x_lo)) throw std::invalid_argument("bad sampling window");
    KernelEstimate est;
    est.x0 = x_lo;
    est.dx = (x_hi - x_lo) / static_cast<double>(n - 1);
    est.values.resize(n);
    for (std::size_t j = 0; j < n; ++j) est.values[j] = f(est.x_at(j));
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j)
        acc += 0.5 * (est.values[j] + est.values[j + 1]) * est.dx;
    est.window_mass = acc;
    est.mass = acc;
    return est;
}

void write_csv(const KernelEstimate& k, std::ostream& os) {
    os << std::setprecision(17);
    os << "# y=" << k.y << ", t=" << k.smoothing_t << ", derivative=" << k.derivative
       << ", mass=" << k.mass << ", window_mass=" << k.window_mass << ", xi_cutoff=" << k.xi_cutoff
       << ", boundary_ratio=" << k.boundary_ratio << ", spec=" << k.spec_hash << "\n";
    os << "x,value\n";
    for (std::size_t j = 0; j < k.size(); ++j) os << k.x_at(j) << ',' << k.values[j] << '\n';
}

}  // namespace poiskern
