#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "poiskern/cheb.hpp"
#include "poiskern/operators.hpp"
#include "poiskern/spectral.hpp"

namespace poiskern {

// Kernel slice on a uniform grid x0 + k dx.  Produced by Fourier inversion of
// the spectral symbol; `derivative` n means the samples are the n-th
// x-derivative of the kernel.
struct KernelEstimate {
    double y = 0;
    int derivative = 0;
    double x0 = 0;
    double dx = 0;
    std::vector<double> values;
    double smoothing_t = 0;
    double mass = 0;           // zero-frequency content of the inverted symbol
    double window_mass = 0;    // trapezoid mass over the reported window
    double xi_cutoff = 0;
    double imag_residual = 0;  // |Im| left over after the Hermitian inversion, relative to the peak
    double boundary_ratio = 0; // edge magnitude relative to the peak
    std::string spec_hash;

    std::size_t size() const { return values.size(); }
    double x_at(std::size_t k) const { return x0 + dx * static_cast<double>(k); }
    double x_hi() const { return values.empty() ? x0 : x_at(values.size() - 1); }

    double value(double x) const;  // linear interpolation, 0 outside the window
    double cdf(double x) const;    // running trapezoid integral from the left edge
    KernelEstimate mirrored() const;  // x -> -x
};

// phi_xi(y) for xi in [0, xi_cutoff], interpolated so that inversions at any
// frequency grid reuse the same ODE solves.
struct KernelSymbol {
    double y = 0;
    double xi_cutoff = 0;
    double tail_abs = 0;  // |phi(xi_cutoff)|
    double mass = 0;      // phi_0(y)
    std::string spec_hash;
    std::shared_ptr<const ChebInterpolant> interp;

    std::complex<double> operator()(double xi) const { return (*interp)(xi); }
};

struct KernelOptions {
    double xi_tol = 1e-10;     // spectral tail threshold for choosing the cutoff
    double xi_max = 4096.0;    // hard cap on the cutoff
    double cheb_tol = 1e-11;   // interpolation tolerance for the symbol
    double smoothing_t = -1.0; // < 0: pick 0 if the tail decayed, else 10/Xi^2
    int derivative = 0;
    double min_window = 64.0;  // reported half-width in x, doubled as needed
    double max_window = 8192.0;
    double window_tol = 1e-8;  // demanded edge/peak ratio
    double pad_factor = 4.0;   // period / reported width
    SolveOptions solve;
};

KernelSymbol build_symbol(const OperatorSpec& spec, double y, const KernelOptions& opts = {});

KernelEstimate invert_symbol(const KernelSymbol& sym, const KernelOptions& opts = {});

// build_symbol + invert_symbol
KernelEstimate build_kernel(const OperatorSpec& spec, double y, const KernelOptions& opts = {});

// Direct inversion of explicitly supplied uniform samples phi(k dxi),
// k = 0..m-1 (Hermitian extension is implied); mainly for testing the
// inversion against analytic symbols.
KernelEstimate invert_samples(const std::vector<std::complex<double>>& phi, double dxi, double y,
                              double t, double x_window, int derivative = 0);

// Wraps an explicit density into the same container (uniform sampling).
KernelEstimate sample_function(const std::function<double(double)>& f, double x_lo, double x_hi,
                               std::size_t n);

void write_csv(const KernelEstimate& k, std::ostream& os);

}  // namespace poiskern
