#pragma once

#include <complex>
#include <vector>

#include <json.hpp>

#include "poiskern/analysis.hpp"
#include "poiskern/operators.hpp"
#include "poiskern/spectral.hpp"

namespace poiskern {

// The operator split at an interior height: the lower part is reflected so
// its own floor is the original split height (check side), the upper part is
// translated down to start at zero (hat side).
struct SplitSpecs {
    OperatorSpec check_spec;  // on [0, check_R), reflected, drift negated
    OperatorSpec hat_spec;    // on [0, R - check_R), shifted
    double check_R = 0;
};

// Split at check_R in (0, R).  Interior atoms land in the half that contains
// them; an atom exactly at the split height is rejected (neither half can
// host it faithfully), and an atom at the original floor belongs to the
// boundary, not to either half.
SplitSpecs split(const OperatorSpec& spec, double check_R);

// Low-frequency limit of the check problem's boundary exponent, computed by
// Richardson extrapolation from small positive frequencies.  Equals
// 1 / (2 check_R) regardless of the coefficients.
double psi_check_at_zero(const SplitSpecs& sp, const SolveOptions& opts = {});

struct FactorizationPoint {
    double xi = 0;
    std::complex<double> lhs;      // phi_xi(check_R) on the original operator
    std::complex<double> factor1;  // 1 / check phi^D(check_R)
    std::complex<double> factor2;  // 1 / (2 check psi + 2 hat psi)
    double residual = 0;           // |lhs - factor1 factor2| / |lhs|
    // Wronskian-type cross identities linking the original solution to the
    // check fundamental pair, tested at the floor and at an interior height;
    // violations are normalised by the size of the cancelling terms.
    double identity_residual = 0;
    double interior_residual = 0;
};

struct FactorizationReport {
    double check_R = 0;
    std::vector<FactorizationPoint> points;
    double max_residual = 0;
    double max_identity_residual = 0;
    double max_interior_residual = 0;
    double psi_check_zero = 0;
    RogersReport rogers_check;
    RogersReport rogers_hat;
    bool pass = false;

    nlohmann::json to_json() const;
};

// 60 log-spaced frequencies on [0.05, 20]
std::vector<double> default_factor_grid();

// Computes both sides of the boundary-value factorisation independently:
// the left side from the bounded solve on the original operator, the first
// factor from the fundamental pair of the check problem, the second from the
// boundary exponents of the two halves.  Passing requires every residual at
// or below tol, both exponents to satisfy the Rogers inequality, and the
// check exponent's zero-frequency limit to match 1/(2 check_R).
FactorizationReport verify_factorization(const OperatorSpec& spec, double check_R,
                                         const std::vector<double>& xi_grid = {},
                                         double tol = 1e-8, const SolveOptions& opts = {});

}  // namespace poiskern
