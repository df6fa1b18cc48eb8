#include "poiskern/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "poiskern/cheb.hpp"
#include "poiskern/quadrature.hpp"

namespace poiskern {

namespace {

using Complex = std::complex<double>;

struct DividedDiff {
    double value = 0;
    double scale = 0;  // sum_j |f_j w_j|, the cancellation the value survives
};

DividedDiff divided_difference(const double* xs, const double* fs, int n) {
    DividedDiff dd;
    for (int j = 0; j < n; ++j) {
        double w = 1.0;
        for (int i = 0; i < n; ++i)
            if (i != j) w /= xs[j] - xs[i];
        dd.value += fs[j] * w;
        dd.scale += std::abs(fs[j] * w);
    }
    return dd;
}

double det_small(std::vector<std::vector<double>>& m) {
    const int n = static_cast<int>(m.size());
    double det = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
        if (m[piv][c] == 0.0) return 0.0;
        if (piv != c) {
            std::swap(m[piv], m[c]);
            det = -det;
        }
        det *= m[c][c];
        for (int r = c + 1; r < n; ++r) {
            double q = m[r][c] / m[c][c];
            for (int k = c; k < n; ++k) m[r][k] -= q * m[c][k];
        }
    }
    return det;
}

// raw 53-bit mantissa, identical across platforms
double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

std::vector<double> sorted_tuple(std::mt19937_64& g, int n, double range) {
    std::vector<double> v(n);
    for (;;) {
        for (double& x : v) x = range * uniform01(g);
        std::sort(v.begin(), v.end());
        double gap = range;
        for (int i = 0; i + 1 < n; ++i) gap = std::min(gap, v[i + 1] - v[i]);
        if (n == 1 || gap > 1e-4 * range) return v;
    }
}

double one_minus_cos(double s) { return 2.0 * std::pow(std::sin(0.5 * s), 2); }

double s_minus_sin(double s) {
    if (std::abs(s) < 1e-2) {
        double s2 = s * s;
        return s * s2 * (1.0 / 6.0 - s2 / 120.0 + s2 * s2 / 5040.0);
    }
    return s - std::sin(s);
}

// int_c^inf {cos,sin}(xi z) g(z) dz for smooth decaying g, via the shifted
// Fourier integrals on [0, inf)
struct OscTail {
    double cos_part = 0;
    double sin_part = 0;
};

OscTail oscillatory_tail(const std::function<double(double)>& g, double c, double xi) {
    static thread_local boost::math::quadrature::ooura_fourier_sin<double> sin_int;
    static thread_local boost::math::quadrature::ooura_fourier_cos<double> cos_int;
    auto shifted = [&g, c](double w) { return g(c + w); };
    double s = sin_int.integrate(shifted, xi).first;
    double co = cos_int.integrate(shifted, xi).first;
    OscTail out;
    out.cos_part = std::cos(xi * c) * co - std::sin(xi * c) * s;
    out.sin_part = std::sin(xi * c) * co + std::cos(xi * c) * s;
    return out;
}

// one side of the jump integral: int over z > 0 of
// (1 - e^{i xi z} + i xi z 1_{z <= c}) g(z) dz.  The compensated integrands
// are bounded near 0 even for densities as singular as z^{-2}, but the two
// factors can underflow/overflow separately when quadrature probes points
// within ~1e-300 of the origin; such points contribute nothing.
Complex jump_side(const std::function<double(double)>& g, double c, double xi) {
    auto re_in = [&](double z) {
        double v = one_minus_cos(xi * z) * g(z);
        return std::isfinite(v) ? v : 0.0;
    };
    auto im_in = [&](double z) {
        double v = s_minus_sin(xi * z) * g(z);
        return std::isfinite(v) ? v : 0.0;
    };
    double re = integrate(re_in, 0.0, c);
    double im = integrate(im_in, 0.0, c);
    double mass = integrate_to_inf(g, c);
    OscTail tail = oscillatory_tail(g, c, xi);
    re += mass - tail.cos_part;
    im += -tail.sin_part;
    return Complex(re, im);
}

}  // namespace

int count_sign_changes(const std::vector<double>& v, double rel_tol) {
    double peak = 0.0;
    for (double x : v) peak = std::max(peak, std::abs(x));
    if (peak == 0.0) return 0;
    int changes = 0, last = 0;
    for (double x : v) {
        if (std::abs(x) <= rel_tol * peak) continue;
        int s = x > 0.0 ? 1 : -1;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

BellShapeReport check_bell_shape(const OperatorSpec& spec, double y, const std::vector<double>& ts,
                                 int max_order, const KernelOptions& opts) {
    if (ts.empty()) throw std::invalid_argument("need at least one smoothing time");
    for (double t : ts)
        if (!(t > 0.0)) throw std::invalid_argument("smoothing times must be positive");
    if (max_order < 0) throw std::invalid_argument("negative derivative order");

    // one symbol per resolution serves every (t, order) pair; the cutoff
    // search may rely on the weakest smoothing that will be applied but must
    // anticipate the strongest derivative weight
    KernelOptions base = opts;
    base.smoothing_t = *std::min_element(ts.begin(), ts.end());
    base.derivative = max_order;
    KernelSymbol coarse = build_symbol(spec, y, base);
    KernelOptions fine_opts = base;
    fine_opts.solve.base_cells *= 2;
    KernelSymbol fine = build_symbol(spec, y, fine_opts);

    BellShapeReport rep;
    rep.y = y;
    for (double t : ts) {
        for (int n = 0; n <= max_order; ++n) {
            KernelOptions io = base;
            io.smoothing_t = t;
            io.derivative = n;
            BellShapeEntry entry;
            entry.t = t;
            entry.order = n;
            entry.changes = count_sign_changes(invert_symbol(coarse, io).values);
            entry.changes_refined = count_sign_changes(invert_symbol(fine, io).values);
            if (entry.changes != n || entry.changes_refined != n) rep.pass = false;
            rep.entries.push_back(entry);
        }
    }
    return rep;
}

MonotoneReport check_complete_monotone(const std::function<double(double)>& f, double lo, double hi,
                                       int max_order, double ratio, double tol) {
    if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("need 0 < lo < hi");
    if (!(ratio > 1.001)) throw std::invalid_argument("geometric ratio too close to 1");
    if (max_order < 0) throw std::invalid_argument("negative order");

    std::vector<double> xs, fs;
    for (double x = lo; x <= hi * (1.0 + 1e-12); x *= ratio) {
        xs.push_back(x);
        fs.push_back(f(x));
    }
    MonotoneReport rep;
    rep.max_order = max_order;
    for (std::size_t m = 0; m < xs.size(); ++m) {
        for (int k = 0; k <= max_order && m + k < xs.size(); ++k) {
            DividedDiff dd = divided_difference(&xs[m], &fs[m], k + 1);
            double want = (k % 2 == 0) ? dd.value : -dd.value;
            double viol = std::max(0.0, -want) / std::max(dd.scale, 1e-300);
            if (viol > rep.worst) {
                rep.worst = viol;
                rep.worst_x = xs[m];
                rep.worst_order = k;
            }
        }
    }
    rep.pass = rep.worst <= tol;
    return rep;
}

MonotoneReport check_amcm(const std::function<double(double)>& f, double lo, double hi,
                          int max_order, double ratio, double tol) {
    MonotoneReport right = check_complete_monotone(f, lo, hi, max_order, ratio, tol);
    MonotoneReport left = check_complete_monotone([&f](double x) { return f(-x); }, lo, hi,
                                                  max_order, ratio, tol);
    MonotoneReport rep = right;
    if (left.worst > rep.worst) {
        rep.worst = left.worst;
        rep.worst_x = -left.worst_x;
        rep.worst_order = left.worst_order;
    }
    rep.pass = right.pass && left.pass;
    return rep;
}

double difference_minor(const std::function<double(double)>& f, const std::vector<double>& xs,
                        const std::vector<double>& ys) {
    if (xs.empty() || xs.size() != ys.size())
        throw std::invalid_argument("minor needs point tuples of equal nonzero length");
    const std::size_t n = xs.size();
    std::vector<std::vector<double>> m(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m[i][j] = f(xs[i] - ys[j]);
    return det_small(m);
}

TotalPositivityReport check_total_positivity(const std::function<double(double)>& f, double range,
                                             int max_order, int trials, std::uint64_t seed,
                                             double tol) {
    if (!(range > 0.0) || max_order < 1 || trials < 1)
        throw std::invalid_argument("bad total positivity request");
    std::mt19937_64 gen(seed);
    TotalPositivityReport rep;
    rep.max_order = max_order;
    for (int trial = 0; trial < trials; ++trial) {
        int n = 1 + static_cast<int>(gen() % static_cast<std::uint64_t>(max_order));
        std::vector<double> xs = sorted_tuple(gen, n, range);
        std::vector<double> ys = sorted_tuple(gen, n, range);
        std::vector<std::vector<double>> m(n, std::vector<double>(n));
        double hadamard = 1.0;
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            for (int j = 0; j < n; ++j) {
                m[i][j] = f(xs[i] - ys[j]);
                row += m[i][j] * m[i][j];
            }
            hadamard *= std::sqrt(row);
        }
        double score = -det_small(m) / std::max(hadamard, 1e-300);
        if (score > rep.worst) {
            rep.worst = score;
            rep.witness_x = xs;
            rep.witness_y = ys;
        }
    }
    rep.pass = rep.worst <= tol;
    return rep;
}

RogersReport check_rogers(const RogersSample& sweep, double tol) {
    if (sweep.xi.empty() || sweep.xi.size() != sweep.psi.size())
        throw std::invalid_argument("empty or mismatched frequency sweep");
    RogersReport rep;
    rep.min_re_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sweep.xi.size(); ++i) {
        // the ratio inequality lives on Re xi > 0; conjugate-symmetric
        // extensions to the left half flip its sign by construction
        if (!(sweep.xi[i].real() > 0.0)) continue;
        Complex r = sweep.psi[i] / sweep.xi[i];
        rep.scale = std::max(rep.scale, std::abs(r));
        if (r.real() < rep.min_re_ratio) {
            rep.min_re_ratio = r.real();
            rep.at_xi = sweep.xi[i].real();
        }
    }
    if (!std::isfinite(rep.min_re_ratio))
        throw std::invalid_argument("no nonzero frequencies in sweep");
    rep.pass = rep.min_re_ratio >= -tol;
    return rep;
}

RogersSample rogers_from_levy(const LevyTriplet& lt, const std::vector<double>& xi_grid) {
    if (lt.sigma2 < 0.0 || !(lt.cutoff > 0.0))
        throw std::invalid_argument("triplet needs sigma2 >= 0 and a positive cutoff");
    RogersSample out;
    for (double xi_signed : xi_grid) {
        const double xi = std::abs(xi_signed);
        Complex big(0.5 * lt.sigma2 * xi * xi, -lt.gamma * xi);
        if (lt.nu && xi > 0.0) {
            auto right = [&lt](double z) { return lt.nu(z); };
            auto left = [&lt](double u) { return lt.nu(-u); };
            Complex jr = jump_side(right, lt.cutoff, xi);
            Complex jl = jump_side(left, lt.cutoff, xi);
            big += jr + std::conj(jl);
        }
        if (xi_signed < 0.0) big = std::conj(big);
        out.xi.push_back(Complex(xi_signed, 0.0));
        out.psi.push_back(0.5 * big);
    }
    return out;
}

Complex PolyaFrequencyForm::symbol(double xi) const {
    Complex s = std::exp(Complex(-0.5 * sigma2 * xi * xi, shift * xi));
    for (double lam : lambdas) {
        if (lam == 0.0) throw std::invalid_argument("exponential factor needs a nonzero rate");
        s /= Complex(1.0, -xi / lam);
    }
    return s;
}

KernelEstimate PolyaFrequencyForm::density(double window, double dxi) const {
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("density inversion needs a Gaussian factor (sigma2 > 0)");
    const double cut = std::sqrt(60.0 / sigma2);  // damping below 1e-13 at the cut
    const std::size_t m = static_cast<std::size_t>(std::ceil(cut / dxi)) + 1;
    std::vector<Complex> s(m);
    for (std::size_t k = 0; k < m; ++k) s[k] = symbol(dxi * static_cast<double>(k));
    return invert_samples(s, dxi, 0.0, 0.0, window, 0);
}

std::vector<int> convolution_sign_changes(const PolyaFrequencyForm& pf,
                                          const std::function<Complex(double)>& ghat, double xi_max,
                                          int max_order, double window, double dxi, double rel_tol) {
    if (!(xi_max > 0.0) || !(dxi > 0.0) || max_order < 0)
        throw std::invalid_argument("bad convolution request");
    const std::size_t m = static_cast<std::size_t>(std::ceil(xi_max / dxi)) + 1;
    std::vector<Complex> s(m);
    for (std::size_t k = 0; k < m; ++k) {
        double xi = dxi * static_cast<double>(k);
        s[k] = pf.symbol(xi) * ghat(xi);
    }
    std::vector<int> counts;
    counts.reserve(static_cast<std::size_t>(max_order) + 1);
    for (int n = 0; n <= max_order; ++n)
        counts.push_back(count_sign_changes(invert_samples(s, dxi, 0.0, 0.0, window, n).values,
                                            rel_tol));
    return counts;
}

ResolventDensity::ResolventDensity(const OperatorSpec& spec, SolveOptions opts, double xi_big)
    : xi_big_(xi_big) {
    spec.validate();
    if (spec.R == kInfiniteR)
        throw std::invalid_argument("potential density needs a finite slab");
    if (!spec.b.is_zero())
        throw std::invalid_argument("potential density is implemented for b = 0 only");
    if (!(xi_big > 8.0)) throw std::invalid_argument("frequency window too small");

    auto psi_at = [&spec, &opts](double xi) {
        return compute_psi(spec, Complex(xi, 0.0), opts).psi;
    };
    // psi extends evenly in xi, so Richardson in xi^2 from two small
    // frequencies reaches the boundary limit
    const double h = 1e-3;
    psi_zero_ = ((4.0 * psi_at(0.5 * h) - psi_at(h)) / 3.0).real();

    std::function<Complex(double)> F = [psi_at](double xi) { return 1.0 / psi_at(xi); };
    inv_psi_ = std::make_shared<ChebInterpolant>(F, 0.0, xi_big, 1e-11, 22, 2.0 * spec.R);

    // xi / psi tends to a constant with an O(1/xi) correction; Richardson
    // across one octave removes the correction
    const double f1 = (xi_big * (*inv_psi_)(xi_big)).real();
    const double f2 = (0.5 * xi_big * (*inv_psi_)(0.5 * xi_big)).real();
    a_inf_ = 2.0 * f1 - f2;

    // fit the two remaining tail weights so the smooth remainder vanishes at
    // xi_big/2 and xi_big; the truncated tail then integrates by parts to
    // O(a_inf / xi_big^4)
    auto remainder = [this](double xi) {
        return (*inv_psi_)(xi).real() - a_inf_ / std::sqrt(1.0 + xi * xi);
    };
    const double q1 = 1.0 + 0.25 * xi_big * xi_big, q2 = 1.0 + xi_big * xi_big;
    const double r1 = remainder(0.5 * xi_big), r2 = remainder(xi_big);
    const double a11 = 1.0 / q1, a12 = 1.0 / (q1 * std::sqrt(q1));
    const double a21 = 1.0 / q2, a22 = 1.0 / (q2 * std::sqrt(q2));
    const double det = a11 * a22 - a12 * a21;
    c_ = (r1 * a22 - r2 * a12) / det;
    d_ = (a11 * r2 - a21 * r1) / det;
}

double ResolventDensity::operator()(double x) const {
    const double ax = std::abs(x);
    if (!(ax > 0.0) || !std::isfinite(ax))
        throw std::invalid_argument("potential density is singular at the origin");
    auto smooth = [this](double xi) {
        const double q = 1.0 + xi * xi;
        const double rq = std::sqrt(q);
        return (*inv_psi_)(xi).real() - a_inf_ / rq - c_ / q - d_ / (q * rq);
    };
    const double width = std::min(1.0, 0.5 * M_PI / ax);
    const int panels = static_cast<int>(std::ceil(xi_big_ / width));
    double acc = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double a = xi_big_ * k / panels, b = xi_big_ * (k + 1) / panels;
        acc += gauss16([&](double xi) { return std::cos(xi * ax) * smooth(xi); }, a, b);
    }
    using boost::math::cyl_bessel_k;
    return acc / M_PI + a_inf_ * cyl_bessel_k(0, ax) / M_PI + 0.5 * c_ * std::exp(-ax) +
           d_ * ax * cyl_bessel_k(1, ax) / M_PI;
}

ResolventReport check_resolvent_amcm(const OperatorSpec& spec, double x_lo, double x_hi,
                                     int max_order, double tol, SolveOptions opts) {
    // high-order divided differences amplify solver noise; tighten the
    // frequency-side accuracy well below the requested violation tolerance
    opts.rel_tol = std::min(opts.rel_tol, 1e-10);
    ResolventDensity dens(spec, opts);
    ResolventReport rep;
    rep.psi_zero = dens.psi_zero();
    rep.a_inf = dens.a_inf();
    rep.monotone =
        check_amcm([&dens](double x) { return dens(x); }, x_lo, x_hi, max_order, 1.25, tol);
    rep.pass = rep.monotone.pass;
    return rep;
}

SolutionShapeReport check_solution_invariants(const SpectralSolution& sol, double tol) {
    const std::vector<double>& nodes = sol.mesh->nodes;
    const std::size_t n = std::min(sol.u.size(), nodes.size());
    if (n < 3) throw std::invalid_argument("solution too short for shape checks");

    // rebuild magnitudes through logs so rescaled tails cannot overflow;
    // anything below the representable range counts as zero
    auto mag2 = [&sol](std::size_t i) {
        const double au = std::abs(sol.u[i]);
        if (au == 0.0) return 0.0;
        const double lg = 2.0 * (sol.log_scale[i] + std::log(au));
        return lg < -650.0 ? 0.0 : std::exp(lg);
    };
    auto dmag = [&sol](std::size_t i) {
        const double av = std::abs(sol.v[i]);
        if (av == 0.0) return 0.0;
        const double lg = sol.log_scale[i] + std::log(av);
        return lg < -650.0 ? 0.0 : std::exp(lg);
    };
    std::vector<double> s(n), d(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = mag2(i);
        d[i] = dmag(i);
    }

    SolutionShapeReport rep;
    const double tiny = 1e-300;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double up = s[i + 1] - s[i];
        if (up > 0.0)
            rep.worst_decrease = std::max(rep.worst_decrease, up / std::max({s[i], s[i + 1], tiny}));
        const double dup = d[i + 1] - d[i];
        if (dup > 0.0)
            rep.worst_slope = std::max(rep.worst_slope, dup / std::max({d[i], d[i + 1], tiny}));
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double xs[3] = {nodes[i - 1], nodes[i], nodes[i + 1]};
        const double fs[3] = {s[i - 1], s[i], s[i + 1]};
        DividedDiff dd = divided_difference(xs, fs, 3);
        rep.worst_convexity =
            std::max(rep.worst_convexity, std::max(0.0, -dd.value) / std::max(dd.scale, tiny));
    }
    rep.pass = rep.worst_decrease <= tol && rep.worst_convexity <= tol && rep.worst_slope <= tol;
    return rep;
}

}  // namespace poiskern
