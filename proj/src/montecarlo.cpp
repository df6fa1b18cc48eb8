#include "poiskern/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "poiskern/parallel.hpp"

namespace poiskern {

void PathConfig::validate() const {
    spec.validate();
    if (!(y0 > 0.0) || !(y0 < spec.R))
        throw std::invalid_argument("start height must lie strictly inside (0, R)");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("step size must be positive");
    if (!(max_time > 0.0)) throw std::invalid_argument("censoring horizon must be positive");
}

PathFunctionals simulate_path(const PathConfig& config, std::mt19937_64& rng) {
    config.validate();
    const OperatorSpec& spec = config.spec;
    const double dt = config.dt;
    const double sdt = std::sqrt(dt);
    const double R = spec.R;
    const bool finite_top = std::isfinite(R);
    const double eps = config.atom_band > 0.0 ? config.atom_band : sdt;
    const bool have_a = !spec.a_density.is_zero();
    const bool have_b = !spec.b.is_zero();

    // Atoms above the floor charge the clock through band occupation.  The
    // floor's own local time vanishes before the first visit, so an atom at
    // zero contributes nothing to a path stopped there.
    std::vector<Atom> atoms;
    for (const Atom& at : spec.atoms)
        if (at.y > 0.0) atoms.push_back(at);

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    const long long max_steps = static_cast<long long>(std::ceil(config.max_time / dt));
    PathFunctionals out;
    double z = config.y0;

    for (long long n = 0; n < max_steps; ++n) {
        const double z1 = z + sdt * gauss(rng);

        // Within-step crossings: a sign change is a certain floor visit
        // (continuity), otherwise the Brownian bridge between the endpoints
        // crosses a barrier with probability exp(-2 d d'/dt), where d, d'
        // are the endpoint distances to it.  Exponents past 40 are left
        // unexamined (probability under 1e-17).
        bool hit0 = false, hitR = false;
        if (z1 <= 0.0) {
            hit0 = true;
        } else {
            const double e0 = 2.0 * z * z1 / dt;
            if (e0 < 40.0 && unif(rng) < std::exp(-e0)) hit0 = true;
        }
        if (!hit0 && finite_top) {
            if (z1 >= R) {
                hitR = true;
            } else {
                const double eR = 2.0 * (R - z) * (R - z1) / dt;
                if (eR < 40.0 && unif(rng) < std::exp(-eR)) hitR = true;
            }
        }

        // Snapping the step's endpoint to the barrier keeps the midpoint
        // inside the domain and makes the drift increment sum telescope to
        // the exact martingale increment b-weighted along the path.
        const double z_end = hit0 ? 0.0 : (hitR ? R : z1);
        const double y_mid = 0.5 * (z + z_end);
        if (have_a) out.a += spec.a_density(y_mid) * dt;
        for (const Atom& at : atoms)
            if (std::abs(y_mid - at.y) <= eps) out.a += at.w * dt / (2.0 * eps);
        if (have_b) out.b += spec.b(z) * (z_end - z);

        out.elapsed += dt;
        if (hit0) {
            out.outcome = HitOutcome::Hit0;
            return out;
        }
        if (hitR) {
            out.outcome = HitOutcome::HitR;
            return out;
        }
        z = z1;
    }
    out.outcome = HitOutcome::Censored;
    return out;
}

HitSample simulate_hit(const PathConfig& config, std::mt19937_64& rng) {
    PathFunctionals path = simulate_path(config, rng);
    HitSample out;
    out.outcome = path.outcome;
    out.elapsed = path.elapsed;
    if (path.outcome == HitOutcome::Hit0) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        out.x = path.b + std::sqrt(path.a) * gauss(rng);
    }
    return out;
}

std::uint64_t path_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + (index + 1) * 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d4c9b2b5e0d395ull;
    return z ^ (z >> 31);
}

std::vector<HitSample> run_simulation(const PathConfig& config, int n_paths, int workers) {
    config.validate();
    if (n_paths <= 0) throw std::invalid_argument("path count must be positive");
    std::vector<HitSample> out(static_cast<std::size_t>(n_paths));
    parallel_for(
        n_paths,
        [&](int i) {
            std::mt19937_64 rng(path_seed(config.seed, static_cast<std::uint64_t>(i)));
            out[static_cast<std::size_t>(i)] = simulate_hit(config, rng);
        },
        workers);
    return out;
}

double CharfnPoint::se() const { return std::hypot(se_re, se_im); }

std::vector<CharfnPoint> estimate_charfn(const std::vector<HitSample>& samples,
                                         const std::vector<double>& xi_grid) {
    if (samples.size() < 1000)
        throw std::invalid_argument("characteristic function estimate needs at least 1000 samples");
    const double n = static_cast<double>(samples.size());
    std::vector<CharfnPoint> out;
    out.reserve(xi_grid.size());
    for (double xi : xi_grid) {
        double sum_re = 0, sum_im = 0, sq_re = 0, sq_im = 0;
        for (const HitSample& s : samples) {
            double re = 0, im = 0;
            if (s.outcome == HitOutcome::Hit0) {
                re = std::cos(xi * s.x);
                im = std::sin(xi * s.x);
            }
            sum_re += re;
            sum_im += im;
            sq_re += re * re;
            sq_im += im * im;
        }
        CharfnPoint pt;
        pt.xi = xi;
        const double mean_re = sum_re / n, mean_im = sum_im / n;
        pt.value = {mean_re, mean_im};
        // delete-one jackknife of a sample mean collapses to s / sqrt(n)
        const double var_re = std::max(0.0, (sq_re - n * mean_re * mean_re) / (n - 1.0));
        const double var_im = std::max(0.0, (sq_im - n * mean_im * mean_im) / (n - 1.0));
        pt.se_re = std::sqrt(var_re / n);
        pt.se_im = std::sqrt(var_im / n);
        out.push_back(pt);
    }
    return out;
}

double ks_test(const std::vector<HitSample>& samples, const std::function<double(double)>& cdf) {
    std::vector<double> xs;
    for (const HitSample& s : samples)
        if (s.outcome == HitOutcome::Hit0) xs.push_back(s.x);
    if (xs.size() < 10000) throw std::invalid_argument("KS test needs at least 10000 floor hits");
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double model = cdf(xs[i]);
        const double below = static_cast<double>(i) / n;
        const double above = static_cast<double>(i + 1) / n;
        ks = std::max(ks, std::max(model - below, above - model));
    }
    return ks;
}

std::function<double(double)> conditional_cdf(const KernelEstimate& kernel) {
    if (kernel.values.size() < 2) throw std::invalid_argument("kernel estimate has no window");
    std::vector<double> cum(kernel.values.size(), 0.0);
    for (std::size_t j = 1; j < kernel.values.size(); ++j)
        cum[j] = cum[j - 1] + 0.5 * (kernel.values[j - 1] + kernel.values[j]) * kernel.dx;
    const double total = cum.back();
    if (!(total > 0.0)) throw std::invalid_argument("kernel estimate carries no mass");
    const double x0 = kernel.x0, dx = kernel.dx;
    return [cum = std::move(cum), total, x0, dx](double x) {
        const double u = (x - x0) / dx;
        if (u <= 0.0) return 0.0;
        if (u >= static_cast<double>(cum.size() - 1)) return 1.0;
        const std::size_t j = static_cast<std::size_t>(u);
        const double frac = u - static_cast<double>(j);
        return ((1.0 - frac) * cum[j] + frac * cum[j + 1]) / total;
    };
}

}  // namespace poiskern
