#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "poiskern/kernel.hpp"
#include "poiskern/operators.hpp"

namespace poiskern {

// Hitting sampler for the planar diffusion attached to an operator spec.
// The height coordinate is a Brownian motion on [0, R), stopped at its
// first visit to the floor and killed at the ceiling; the horizontal
// coordinate is an independent Brownian motion run with the clock
// A(t) = int L_y(t) a(dy), shifted by the drift functional
// B(t) = int b(Y_s) dY_s (martingale increments).  Conditionally on the
// height path, the horizontal position at the floor-hitting time is
// Normal(B, A), so one Gaussian draw per path realises it.

struct PathConfig {
    OperatorSpec spec;
    double y0 = 0.5;         // start height, in (0, R)
    double dt = 1e-4;        // Euler step of the height path
    double max_time = 1e3;   // censoring horizon
    std::uint64_t seed = 1;  // master seed; per-path streams derive from it
    double atom_band = 0;    // local-time band half-width; <= 0 means sqrt(dt)

    void validate() const;  // throws std::invalid_argument on malformed data
};

enum class HitOutcome { Hit0, HitR, Censored };

struct HitSample {
    HitOutcome outcome = HitOutcome::Censored;
    double x = 0;  // horizontal position, meaningful for floor hits only
    double elapsed = 0;
};

// Height path summary: the additive functionals stopped at the floor, the
// ceiling, or the censoring horizon.
struct PathFunctionals {
    HitOutcome outcome = HitOutcome::Censored;
    double a = 0;  // accumulated horizontal clock
    double b = 0;  // accumulated horizontal shift
    double elapsed = 0;
};

PathFunctionals simulate_path(const PathConfig& config, std::mt19937_64& rng);

// One path: simulate_path plus the Gaussian draw for the horizontal
// coordinate.  Within-step barrier crossings are detected by the
// Brownian-bridge crossing probability, not just by endpoint tests.
HitSample simulate_hit(const PathConfig& config, std::mt19937_64& rng);

// Per-path seed derived from the master seed by a counter-based mix, so
// results are reproducible for any worker count.
std::uint64_t path_seed(std::uint64_t master, std::uint64_t index);

std::vector<HitSample> run_simulation(const PathConfig& config, int n_paths, int workers = 0);

struct CharfnPoint {
    double xi = 0;
    std::complex<double> value;
    double se_re = 0;
    double se_im = 0;
    double se() const;  // combined standard error of the complex mean
};

// Empirical mean of e^{i xi x} over floor hits (ceiling hits and censored
// paths contribute zero), with delete-one jackknife standard errors.
// Requires at least 1000 samples.
std::vector<CharfnPoint> estimate_charfn(const std::vector<HitSample>& samples,
                                         const std::vector<double>& xi_grid);

// Kolmogorov-Smirnov distance between the floor-hit positions and a model
// CDF.  Requires at least 10000 floor hits.
double ks_test(const std::vector<HitSample>& samples, const std::function<double(double)>& cdf);

// CDF of a kernel estimate, normalised to total mass one over its window.
std::function<double(double)> conditional_cdf(const KernelEstimate& kernel);

}  // namespace poiskern
