#pragma once

#include <complex>
#include <memory>
#include <stdexcept>
#include <vector>

#include "poiskern/operators.hpp"

namespace poiskern {

using Complex = std::complex<double>;

// Thrown when propagation or domain truncation fails to converge; the CLI
// maps it to its "solver failure" exit code.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CellCoeffs {
    double a_avg = 0, b_avg = 0, b2_avg = 0;
};

// Exact propagation of (u, u') across a cell of width h carrying frozen
// coefficients: u'' = xi^2 (a_avg + b2_avg) u - 2 i xi b_avg u'.  h may be
// negative (backward sweep).  No rescaling; the caller manages scale.
std::pair<Complex, Complex> propagate(std::pair<Complex, Complex> state, const CellCoeffs& cell,
                                      Complex xi, double h);

enum class SolutionKind { Dirichlet, Neumann, Bounded };

// Solution samples at mesh nodes.  True values are u[i] * exp(log_scale[i]);
// the split representation keeps strongly growing or decaying solutions
// representable.  v holds one-sided derivatives from the right, so the
// derivative jump across an interior atom sits between v-at-node and the
// left limit from the preceding cell.
struct SpectralSolution {
    Complex xi;
    SolutionKind kind = SolutionKind::Dirichlet;
    std::shared_ptr<const Mesh> mesh;
    std::vector<Complex> u, v;
    std::vector<double> log_scale;

    double y_top() const { return mesh->y_max(); }

    // value/derivative with the scale folded in (may over/underflow; use
    // log_value for robust magnitude comparisons)
    Complex value(double y) const;
    Complex derivative(double y) const;
    double log_abs_value(double y) const;

    // raw state at an arbitrary height, propagated within the containing cell
    void state_at(double y, Complex& u_out, Complex& v_out, double& ls_out) const;
};

struct SolveOptions {
    double rel_tol = 1e-8;      // propagation accuracy target (per refinement)
    double trunc_tol = 1e-6;    // domain-truncation stabilisation target
    int base_cells = 160;
    double grading = 1.15;
    int max_refine = 8;
    std::vector<double> eval_points;  // forced onto the mesh as nodes
    bool cross_check = true;          // compare both routes to the Rogers function
    // Truncation of an unbounded domain stops once the solution is stable at
    // the probe heights; with require_psi the boundary functional must be
    // relatively stable too.  Callers that only read the solution switch this
    // off: when psi itself vanishes (small xi, no diffusion above the last
    // atom) its relative stabilisation can demand hopeless domain sizes.
    bool require_psi = true;
};

// Dirichlet (u(0)=0, u'(0+)=1) and Neumann (u(0)=1, u'(0+)=a({0}) xi^2 / 2)
// solutions propagated forward on the given mesh.
std::pair<SpectralSolution, SpectralSolution> solve_fundamental(const OperatorSpec& spec, const Mesh& mesh,
                                                                Complex xi);

// As above but on internally refined meshes until the requested relative
// accuracy is met (Richardson-extrapolated output on the final coarse mesh).
std::pair<SpectralSolution, SpectralSolution> solve_fundamental_refined(const OperatorSpec& spec,
                                                                        double y_max, Complex xi,
                                                                        const SolveOptions& opts = {});

// The bounded solution with u(0) = 1: Dirichlet data at R for finite R,
// Dirichlet truncation with doubling for R = infinity, integrated backward
// (the stable direction).  Requires Re xi > 0, or xi = 0 as a limit.
SpectralSolution solve_bounded(const OperatorSpec& spec, Complex xi, const SolveOptions& opts = {});

struct PsiResult {
    Complex psi = 0;        // -phi'(0+)/2 + a({0}) xi^2 / 2 from the bounded solution
    Complex psi_ratio = 0;  // Neumann/Dirichlet ratio at the top of the domain
    double cross_residual = 0;
    double y_top = 0;
};

// Rogers function of the operator at xi (Re xi > 0).
PsiResult compute_psi(const OperatorSpec& spec, Complex xi, const SolveOptions& opts = {});

struct RogersSample {
    std::vector<Complex> xi;
    std::vector<Complex> psi;
};

RogersSample psi_sweep(const OperatorSpec& spec, const std::vector<Complex>& xi_grid,
                       const SolveOptions& opts = {}, int workers = 0);

// Zeros of zeta -> phi^D_{i zeta}(y) on [zeta_lo, zeta_hi] (the Dirichlet
// solution is real there).  Grid scan plus bisection; zeros closer than the
// scan step can be missed.
std::vector<double> scan_imaginary_zeros(const OperatorSpec& spec, const Mesh& mesh, double y,
                                         double zeta_lo, double zeta_hi, int n_grid = 512);

struct RhpScanResult {
    double min_abs = 0;
    Complex argmin_xi = 0;
};

// Minimum of |phi^D_xi(y)| over a rectangular grid in the right half-plane;
// the Dirichlet solution should never vanish there.
RhpScanResult check_no_rhp_zeros(const OperatorSpec& spec, const Mesh& mesh, double y,
                                 const std::vector<double>& re_grid, const std::vector<double>& im_grid);

}  // namespace poiskern
