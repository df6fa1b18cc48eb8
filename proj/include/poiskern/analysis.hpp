#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "poiskern/kernel.hpp"
#include "poiskern/operators.hpp"
#include "poiskern/spectral.hpp"

namespace poiskern {

// Sign changes of a sampled function; values within rel_tol of the largest
// magnitude are treated as zero and skipped.
int count_sign_changes(const std::vector<double>& v, double rel_tol = 1e-7);

// ---- bell shape ----

struct BellShapeEntry {
    double t = 0;
    int order = 0;
    int changes = -1;
    int changes_refined = -1;
};

struct BellShapeReport {
    double y = 0;
    std::vector<BellShapeEntry> entries;
    bool pass = true;
};

// Gauss-smoothed slice and its x-derivatives up to max_order: order n must
// show exactly n sign changes, and again with the solver grid doubled.  All
// smoothing times must be positive.
BellShapeReport check_bell_shape(const OperatorSpec& spec, double y, const std::vector<double>& ts,
                                 int max_order = 6, const KernelOptions& opts = {});

// ---- divided-difference monotonicity ----

struct MonotoneReport {
    int max_order = 0;
    double worst = 0;    // largest normalised violation over all windows
    double worst_x = 0;  // left end of the worst window (signed)
    int worst_order = 0;
    bool pass = true;
};

// Completely monotone on [lo, hi] (0 < lo): divided differences of order
// k <= max_order on geometric windows carry sign (-1)^k.  Violations are
// normalised per window by sum_j |f(x_j) w_j|, the size of the cancellation
// the difference is extracted from.
MonotoneReport check_complete_monotone(const std::function<double(double)>& f, double lo, double hi,
                                       int max_order = 4, double ratio = 1.25, double tol = 1e-9);

// Absolutely monotone on [-hi, -lo] and completely monotone on [lo, hi].
MonotoneReport check_amcm(const std::function<double(double)>& f, double lo, double hi,
                          int max_order = 4, double ratio = 1.25, double tol = 1e-9);

// ---- total positivity of difference kernels ----

struct TotalPositivityReport {
    int max_order = 0;
    // size of the worst negative minor relative to its Hadamard bound
    // (zero when every sampled minor is nonnegative)
    double worst = 0;
    std::vector<double> witness_x, witness_y;
    bool pass = true;
};

// det [f(x_i - y_j)] for increasing tuples of equal length
double difference_minor(const std::function<double(double)>& f, const std::vector<double>& xs,
                        const std::vector<double>& ys);

// Random increasing tuples in [0, range], minor sizes up to max_order.
TotalPositivityReport check_total_positivity(const std::function<double(double)>& f, double range,
                                             int max_order = 4, int trials = 200,
                                             std::uint64_t seed = 1234, double tol = 1e-10);

// ---- Rogers property ----

struct RogersReport {
    double min_re_ratio = 0;
    double at_xi = 0;
    double scale = 0;  // max |psi/xi| over the grid
    bool pass = true;
};

// Re(psi(xi)/xi) >= -tol over the swept grid (absolute: the ratio is O(1)).
// Entries with Re xi <= 0 are skipped: the inequality characterises the
// right half-plane.
RogersReport check_rogers(const RogersSample& sweep, double tol = 1e-9);

struct LevyTriplet {
    double sigma2 = 0;
    double gamma = 0;
    std::function<double(double)> nu;  // jump density on R \ {0}; may be empty
    double cutoff = 1.0;               // |z| <= cutoff gets the drift compensator
};

// psi(xi) = Psi(xi)/2 for the characteristic exponent Psi, matching the
// normalisation of compute_psi (a flat half-plane gives the Cauchy exponent,
// psi = xi/2).
RogersSample rogers_from_levy(const LevyTriplet& lt, const std::vector<double>& xi_grid);

// ---- synthetic Polya frequency data ----

// Fourier data of a two-sided Polya frequency function: Gaussian times shift
// times exponential factors 1/(1 - i xi/lambda); lambda > 0 contributes a
// right tail, lambda < 0 a left tail.
struct PolyaFrequencyForm {
    double sigma2 = 0.5;
    double shift = 0;
    std::vector<double> lambdas;

    std::complex<double> symbol(double xi) const;
    KernelEstimate density(double window = 32.0, double dxi = 1.0 / 256.0) const;
};

// Derivative sign-change counts (orders 0..max_order) of the convolution of
// the PF density with a function supplied through its Fourier transform.
std::vector<int> convolution_sign_changes(const PolyaFrequencyForm& pf,
                                          const std::function<std::complex<double>(double)>& ghat,
                                          double xi_max, int max_order, double window = 32.0,
                                          double dxi = 1.0 / 256.0, double rel_tol = 1e-7);

// ---- resolvent / potential density ----

// x-space density with Fourier data 1/psi(xi).  The large-xi model
// a_inf/sqrt(1+xi^2) + c/(1+xi^2) + d/(1+xi^2)^{3/2} is fitted and its exact
// transform (Bessel-K and exponential terms) added back; the smooth remainder
// is integrated on Gauss-Legendre panels.  Finite slabs with b = 0 only.
class ResolventDensity {
public:
    explicit ResolventDensity(const OperatorSpec& spec, SolveOptions opts = {},
                              double xi_big = 256.0);
    double operator()(double x) const;  // x != 0 (log singularity at the origin)
    double psi_zero() const { return psi_zero_; }
    double a_inf() const { return a_inf_; }

private:
    std::shared_ptr<const ChebInterpolant> inv_psi_;
    double xi_big_ = 256.0;
    double a_inf_ = 0, c_ = 0, d_ = 0;
    double psi_zero_ = 0;
};

struct ResolventReport {
    double psi_zero = 0;
    double a_inf = 0;
    MonotoneReport monotone;
    bool pass = true;
};

ResolventReport check_resolvent_amcm(const OperatorSpec& spec, double x_lo = 0.05, double x_hi = 2.0,
                                     int max_order = 4, double tol = 1e-6, SolveOptions opts = {});

// ---- pointwise solution shape ----

struct SolutionShapeReport {
    double worst_decrease = 0;   // |phi|^2 failing to decrease
    double worst_convexity = 0;  // |phi|^2 failing to be convex
    double worst_slope = 0;      // |phi'| failing to decrease
    bool pass = true;
};

// |phi|^2 nonincreasing and convex, |phi'| nonincreasing along the mesh.
SolutionShapeReport check_solution_invariants(const SpectralSolution& sol, double tol = 1e-7);

}  // namespace poiskern
