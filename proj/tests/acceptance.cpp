// Acceptance gate: each criterion prints exactly one [PASS]/[FAIL] line with
// its pinned tolerance and the measured figure; the exit status is the number
// of failed criteria.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "poiskern/analysis.hpp"
#include "poiskern/closedform.hpp"
#include "poiskern/factorization.hpp"
#include "poiskern/gridding.hpp"
#include "poiskern/kernel.hpp"
#include "poiskern/montecarlo.hpp"
#include "poiskern/operators.hpp"
#include "poiskern/quadrature.hpp"
#include "poiskern/spectral.hpp"

using namespace poiskern;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return g;
}

struct NamedSpec {
    std::string name;
    OperatorSpec spec;
    std::vector<double> splits;
};

// the shared bank of test operators: both constant-coefficient references,
// a self-similar pair with and without drift, and a pure local-time atom
std::vector<NamedSpec> spec_bank() {
    return {{"strip", make_strip(1.0, 1.0), {0.25, 0.5, 0.75}},
            {"half-plane", make_halfplane(), {0.25, 0.5, 1.0}},
            {"homogeneous q=0", make_homogeneous(1.0, 0.0, 0.8), {0.25, 0.5, 1.0}},
            {"homogeneous q!=0", make_homogeneous(1.0, 0.5, 1.0), {0.25, 0.5, 1.0}},
            {"atom", make_atom_spec(1.0, 1.0), {0.25, 0.5, 1.5}}};
}

double sup_against(const KernelEstimate& est, const std::function<double(double)>& f, double x_lo,
                   double x_hi) {
    double worst = 0;
    for (std::size_t j = 0; j < est.size(); ++j) {
        const double x = est.x_at(j);
        if (x < x_lo || x > x_hi) continue;
        worst = std::max(worst, std::abs(est.values[j] - f(x)));
    }
    return worst;
}

// ---- criteria ----

bool constant_coefficient_oracles(std::string& detail) {
    const auto t0 = Clock::now();
    const std::vector<double> ys = {0.1, 0.5, 0.9};
    SolveOptions opts;
    opts.eval_points = ys;
    double worst = 0;

    const OperatorSpec strip = make_strip(1.0, 1.0);
    const OperatorSpec half = make_halfplane();
    for (double xi : log_spaced(0.05, 50.0, 40)) {
        const SpectralSolution s1 = solve_bounded(strip, {xi, 0.0}, opts);
        const SpectralSolution s2 = solve_bounded(half, {xi, 0.0}, opts);
        for (double y : ys) {
            const double w1 = std::sinh(xi * (1.0 - y)) / std::sinh(xi);
            worst = std::max(worst, std::abs(s1.value(y) - Complex(w1, 0.0)) / w1);
            const double w2 = std::exp(-xi * y);
            worst = std::max(worst, std::abs(s2.value(y) - Complex(w2, 0.0)) / w2);
        }
        const double p1 = 0.5 * xi / std::tanh(xi);
        worst = std::max(worst, std::abs(compute_psi(strip, {xi, 0.0}).psi - Complex(p1, 0.0)) / p1);
        const double p2 = 0.5 * xi;
        worst = std::max(worst, std::abs(compute_psi(half, {xi, 0.0}).psi - Complex(p2, 0.0)) / p2);
    }
    const double elapsed = seconds_since(t0);
    detail = "rel err " + fmt(worst) + " (tol 1e-6), " + fmt(elapsed) +
             "s (limit 10s)";
    return worst <= 1e-6 && elapsed < 10.0;
}

bool atom_oracles(std::string& detail) {
    SolveOptions opts;
    opts.rel_tol = 1e-12;
    // the truncation wall above the atom enters both values only at order
    // 1/height, so 1e-11 stabilisation already leaves errors near 1e-11
    opts.trunc_tol = 1e-11;
    opts.eval_points = {1.0};
    const OperatorSpec atom = make_atom_spec(1.0, 1.0);
    const double psi_err = std::abs(compute_psi(atom, {1.0, 0.0}, opts).psi - Complex(0.25, 0.0));
    const double phi_err = std::abs(solve_bounded(atom, {1.0, 0.0}, opts).value(1.0) - Complex(0.5, 0.0));
    detail = "psi err " + fmt(psi_err) + ", phi err " + fmt(phi_err) +
             " (tol 1e-10)";
    return psi_err <= 1e-10 && phi_err <= 1e-10;
}

bool factorisation_suite(std::string& detail) {
    bool ok = true;
    double worst = 0, worst_zero = 0;
    for (const NamedSpec& row : spec_bank())
        for (double split : row.splits) {
            const FactorizationReport rep = verify_factorization(row.spec, split);
            ok = ok && rep.pass;
            worst = std::max({worst, rep.max_residual, rep.max_identity_residual,
                              rep.max_interior_residual});
            worst_zero = std::max(worst_zero, std::abs(2.0 * split * rep.psi_check_zero - 1.0));
        }
    detail = "5 specs x 3 splits x 60 frequencies, worst residual " + fmt(worst) +
             " (tol 1e-8), zero-limit dev " + fmt(worst_zero) + " (tol 1e-6)";
    return ok;
}

bool homogeneous_profiles(std::string& detail) {
    double worst_ode = 0, worst_mass = 0;
    for (double p : {0.5, 1.0, 2.0})
        for (double q : {-1.0, 0.0, 1.0})
            for (double mu : {0.5, 1.0, 1.5}) {
                const HomogeneousProfile prof(p, q, mu);
                const auto grid = linspace(mu * q - 8.0, mu * q + 8.0, 33);
                auto exact = [&](double x) { return prof.eval(x); };
                worst_ode = std::max(worst_ode, homogeneous_ode_residual(exact, p, q, mu, grid));
                const double lo = mu * q - 60.0 * mu * p - 30.0, hi = mu * q + 60.0 * mu * p + 30.0;
                const double mass = integrate([&](double x) { return prof(x); }, lo, hi, 1e-12) +
                                    integrate_to_inf([&](double x) { return prof(x); }, hi) +
                                    integrate_to_inf([&](double x) { return prof(-x); }, -lo);
                worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
            }

    const HomogeneousProfile cauchy(1.0, 0.0, 1.0);
    const double centre_err = std::abs(cauchy(0.0) - 1.0 / std::acos(-1.0));

    KernelOptions kopts;
    kopts.max_window = 256.0;
    const KernelEstimate est = build_kernel(make_homogeneous(1.0, 1.0, 0.8), 0.8, kopts).mirrored();
    const HomogeneousProfile prof(1.0, 1.0, 0.8);
    const auto scaled = scale_kernel([prof](double x) { return prof(x); }, 0.8, 0.8);
    const double sup = sup_against(est, scaled, -6.0, 6.0);

    detail = "27-point lattice: ODE residual " + fmt(worst_ode) +
             " (tol 1e-8), mass dev " + fmt(worst_mass) + " (tol 1e-6), centre err " +
             fmt(centre_err) + " (tol 1e-10), numeric sup err " + fmt(sup) +
             " (tol 1e-3)";
    return worst_ode <= 1e-8 && worst_mass <= 1e-6 && centre_err <= 1e-10 && sup <= 1e-3;
}

bool fractional_consistency(std::string& detail) {
    double worst = 0;
    for (double alpha : {0.5, 1.0, 1.5}) {
        // the extension operator in natural scale: a(s) = alpha^{(2-2alpha)/alpha} s^{2/alpha-2},
        // so height 1 upstairs sits at s0 = 1/alpha
        const double p = std::pow(alpha, (1.0 - alpha) / alpha);
        const OperatorSpec spec = make_homogeneous(p, 0.0, alpha);
        const KernelEstimate est = build_kernel(spec, 1.0 / alpha).mirrored();
        worst = std::max(worst, sup_against(
                                    est,
                                    [alpha](double x) { return cs_kernel(1, alpha, {x}, 1.0, {0.0}); },
                                    -6.0, 6.0));
    }
    detail = "alpha in {0.5, 1, 1.5}: sup err " + fmt(worst) + " (tol 1e-3)";
    return worst <= 1e-3;
}

bool bell_shape_suite(std::string& detail) {
    bool ok = true;
    int combos = 0;
    for (const NamedSpec& row : spec_bank())
        for (double y : {0.1, 0.5, 0.9}) {
            const BellShapeReport rep = check_bell_shape(row.spec, y, {1e-3, 1e-2}, 6);
            ++combos;
            if (!rep.pass) {
                ok = false;
                detail += " [" + row.name + " y=" + fmt(y) + "]";
            }
        }
    detail = std::to_string(combos) +
             " spec/height combos, orders 0..6, both smoothing times, grid-doubling stable" + detail;
    return ok;
}

bool solution_shape_invariants(std::string& detail) {
    bool ok = true;
    double worst = 0;
    for (const NamedSpec& row : spec_bank())
        for (double xi : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
            const SolutionShapeReport rep = check_solution_invariants(solve_bounded(row.spec, {xi, 0.0}));
            ok = ok && rep.pass;
            worst = std::max({worst, rep.worst_decrease, rep.worst_convexity, rep.worst_slope});
        }

    double min_abs = 1e300;
    for (const NamedSpec& row : spec_bank()) {
        const double y_top = std::isfinite(row.spec.R) ? row.spec.R : 3.0;
        const Mesh mesh = build_mesh(row.spec, y_top, 96);
        const RhpScanResult scan = check_no_rhp_zeros(row.spec, mesh, y_top, linspace(0.1, 5.0, 20),
                                                      linspace(-6.0, 6.0, 20));
        min_abs = std::min(min_abs, scan.min_abs);
    }

    const OperatorSpec strip = make_strip(1.0, 1.0);
    const Mesh mesh = build_mesh(strip, 1.0, 64);
    const double pi = std::acos(-1.0);
    double worst_zero = 0;
    bool zeros_ok = true;
    for (double y : {1.0, 0.5}) {
        const double hi = y == 1.0 ? 10.0 : 20.0;
        const auto zeros = scan_imaginary_zeros(strip, mesh, y, 2.0, hi, 512);
        zeros_ok = zeros_ok && zeros.size() == 3;
        for (double z : zeros) {
            const double k = std::round(z * y / pi);
            worst_zero = std::max(worst_zero, std::abs(z - k * pi / y));
        }
    }

    detail = "monotone/convex dev " + fmt(worst) + " (tol 1e-7), min |phi^D| " +
             fmt(min_abs) + " (floor 1e-6), strip zero dev " + fmt(worst_zero) +
             " (tol 1e-8)";
    return ok && min_abs > 1e-6 && zeros_ok && worst_zero <= 1e-8;
}

bool rogers_suite(std::string& detail) {
    bool ok = true;
    double worst_ratio = 0;
    const auto grid = log_spaced(0.05, 50.0, 30);
    for (const NamedSpec& row : spec_bank()) {
        std::vector<Complex> zgrid;
        for (double x : grid) zgrid.emplace_back(x, 0.0);
        const RogersReport rep = check_rogers(psi_sweep(row.spec, zgrid));
        ok = ok && rep.pass;
        worst_ratio = std::min(worst_ratio, rep.min_re_ratio);
    }

    const ResolventReport res = check_resolvent_amcm(make_strip(1.0, 1.0));
    const double psi0_err = std::abs(res.psi_zero - 0.5);

    PolyaFrequencyForm pf;
    pf.sigma2 = 0.5;
    pf.lambdas = {2.0, -3.0};
    const std::vector<std::function<Complex(double)>> ghats = {
        [](double xi) { return Complex(2.0 / (1.0 + xi * xi), 0.0); },
        [](double xi) { return 1.0 / Complex(2.0, -xi) + 1.0 / Complex(3.0, xi); },
        [](double xi) { return Complex(0.5 + 2.0 / (1.0 + xi * xi), 0.0); },
    };
    bool conv_ok = true;
    for (const auto& ghat : ghats) {
        const auto counts = convolution_sign_changes(pf, ghat, 16.0, 4, 32.0, 1.0 / 256.0, 1e-5);
        for (int n = 0; n <= 4; ++n) conv_ok = conv_ok && counts[static_cast<std::size_t>(n)] == n;
    }

    detail = "min Re(psi/xi) " + fmt(worst_ratio) + " (floor -1e-9), resolvent AM-CM " +
             std::string(res.pass ? "pass" : "FAIL") + ", psi(0+) err " + fmt(psi0_err) +
             " (tol 1e-6), convolution counts " + std::string(conv_ok ? "exact" : "FAIL");
    return ok && res.pass && psi0_err <= 1e-6 && conv_ok;
}

bool monte_carlo_suite(std::string& detail) {
    PathConfig cfg;
    cfg.spec = make_strip(1.0, 1.0);
    cfg.y0 = 0.5;
    cfg.dt = 1e-4;
    cfg.seed = 2026;
    const int n = 100000;

    const auto t0 = Clock::now();
    const auto samples = run_simulation(cfg, n, 1);
    const double elapsed = seconds_since(t0);

    std::size_t hits = 0;
    for (const auto& s : samples)
        if (s.outcome == HitOutcome::Hit0) ++hits;
    const double frac = static_cast<double>(hits) / n;
    const double sigma = std::sqrt(0.25 / n);
    const bool frac_ok = std::abs(frac - 0.5) <= 3.0 * sigma;

    bool charfn_ok = true;
    double worst_dev = 0;
    for (const CharfnPoint& pt : estimate_charfn(samples, {0.5, 1.0, 2.0})) {
        const double want = 0.5 / std::cosh(0.5 * pt.xi);
        const double dev = std::abs(pt.value - Complex(want, 0.0)) / pt.se();
        worst_dev = std::max(worst_dev, dev);
        charfn_ok = charfn_ok && dev <= 3.0;
    }

    const KernelEstimate kern = build_kernel(cfg.spec, cfg.y0).mirrored();
    const double ks = ks_test(samples, conditional_cdf(kern));

    const auto again = run_simulation(cfg, 2000, 1);
    bool reproducible = true;
    for (std::size_t i = 0; i < again.size(); ++i)
        reproducible = reproducible && again[i].outcome == samples[i].outcome &&
                       again[i].x == samples[i].x && again[i].elapsed == samples[i].elapsed;

    detail = "hit prob dev " + fmt(std::abs(frac - 0.5)) + " (3 sigma " +
             fmt(3.0 * sigma) + "), charfn worst " + fmt(worst_dev) +
             " sigma (limit 3), KS " + fmt(ks) + " (tol 0.01), " +
             fmt(elapsed) + "s (limit 300s), replay " +
             std::string(reproducible ? "exact" : "FAIL");
    return frac_ok && charfn_ok && ks <= 0.01 && elapsed < 300.0 && reproducible;
}

bool total_positivity_control(std::string& detail) {
    const auto gauss = [](double x) { return std::exp(-x * x); };
    const auto cauchy = [](double x) { return 1.0 / (1.0 + x * x); };
    const TotalPositivityReport ok = check_total_positivity(gauss, 3.0, 4, 200, 99);
    const TotalPositivityReport bad = check_total_positivity(cauchy, 4.0, 4, 200, 99);
    detail = "Gaussian worst " + fmt(ok.worst) + " (pass), Cauchy worst " +
             fmt(bad.worst) + " (must fail a minor)";
    return ok.pass && !bad.pass && bad.worst > 1e-6;
}

}  // namespace

int main() {
    struct Criterion {
        const char* label;
        bool (*run)(std::string&);
    };
    const Criterion criteria[] = {
        {"constant-coefficient solutions and exponents match closed forms", constant_coefficient_oracles},
        {"pure-atom operator reproduces its piecewise-linear solution", atom_oracles},
        {"two-sided factorisation of the boundary value", factorisation_suite},
        {"self-similar profiles: characterising ODE, mass, numeric agreement", homogeneous_profiles},
        {"fractional half-space kernels match the extension operator", fractional_consistency},
        {"smoothed kernel slices are bell-shaped through order six", bell_shape_suite},
        {"solution shape invariants, zero-free half-plane, strip zero ladder", solution_shape_invariants},
        {"boundary exponents are Rogers functions; potential kernel is AM-CM", rogers_suite},
        {"path sampler agrees with the spectral solution and kernel law", monte_carlo_suite},
        {"total positivity tester separates Gaussian from Cauchy", total_positivity_control},
    };

    int failures = 0, index = 0;
    for (const Criterion& c : criteria) {
        ++index;
        std::string detail;
        bool pass = false;
        try {
            pass = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        if (!pass) ++failures;
        std::printf("[%s] criterion %2d: %s -- %s\n", pass ? "PASS" : "FAIL", index, c.label,
                    detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/10 criteria passed\n", 10 - failures);
    return failures;
}
