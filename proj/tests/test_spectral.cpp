#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "poiskern/gridding.hpp"
#include "poiskern/spectral.hpp"

using namespace poiskern;
using namespace std::complex_literals;

TEST_CASE("cell propagation: constant coefficients, analytic check") {
    // a = 1, b = 0, xi = 1: u'' = u, so (0,1) -> (sinh h, cosh h)
    CellCoeffs cell{1.0, 0.0, 0.0};
    auto [u, v] = propagate({0.0, 1.0}, cell, 1.0, 1.0);
    CHECK(std::abs(u - 1.1752011936438014) < 1e-14);
    CHECK(std::abs(v - 1.5430806348152437) < 1e-14);
}

TEST_CASE("cell propagation: degenerate quadratic block") {
    // a = 0, b = 1 (so b2 = 1), xi = i: tau = 2, k2 = -1, omega = 0;
    // exp(h M) = e^h [[1-h, h], [-h, 1+h]]: (0,1) -> (e, 2e) at h = 1
    CellCoeffs cell{0.0, 1.0, 1.0};
    auto [u, v] = propagate({0.0, 1.0}, cell, 1.0i, 1.0);
    CHECK(std::abs(u - std::exp(1.0)) < 1e-13);
    CHECK(std::abs(v - 2.0 * std::exp(1.0)) < 1e-13);
}

TEST_CASE("cell propagation inverts under sign reversal") {
    CellCoeffs cell{0.7, -0.3, 0.2};
    Complex xi = 1.3 + 0.4i;
    auto fwd = propagate({0.25 + 0.1i, -0.6 + 0.9i}, cell, xi, 0.8);
    auto back = propagate(fwd, cell, xi, -0.8);
    CHECK(std::abs(back.first - (0.25 + 0.1i)) < 1e-13);
    CHECK(std::abs(back.second - (-0.6 + 0.9i)) < 1e-13);
}

TEST_CASE("fundamental solutions on a constant strip are exact") {
    OperatorSpec spec = make_strip(1.0, 1.0);
    Mesh mesh = build_mesh(spec, 1.0, 64);
    auto [dir, neu] = solve_fundamental(spec, mesh, 1.0);
    // phi_D(y) = sinh(xi y)/xi, phi_N(y) = cosh(xi y)
    CHECK(std::abs(dir.value(1.0) - 1.1752011936438014) < 1e-12);
    CHECK(std::abs(neu.value(1.0) - 1.5430806348152437) < 1e-12);
    CHECK(std::abs(dir.value(0.5) - std::sinh(0.5)) < 1e-12);
    CHECK(std::abs(dir.derivative(0.5) - std::cosh(0.5)) < 1e-12);

    auto [dir2, neu2] = solve_fundamental(spec, mesh, 1.0 + 1.0i);
    Complex xi = 1.0 + 1.0i;
    CHECK(std::abs(dir2.value(1.0) - std::sinh(xi) / xi) < 1e-12);
    CHECK(std::abs(std::abs(dir2.value(1.0)) - 1.0220497208588697) < 1e-12);
}

TEST_CASE("atom jump shows up in the derivative, not the value") {
    OperatorSpec spec = make_atom_spec(1.0, 1.0);
    Mesh mesh = build_mesh(spec, 3.0, 24);
    auto [dir, neu] = solve_fundamental(spec, mesh, 1.0);
    // piecewise-linear solutions: phi_D = y then 1 + 2(y-1); phi_N = 1 then 1 + (y-1)
    CHECK(std::abs(dir.value(1.0) - 1.0) < 1e-13);
    CHECK(std::abs(dir.value(3.0) - 5.0) < 1e-13);
    CHECK(std::abs(neu.value(3.0) - 3.0) < 1e-13);
    // right limit of the slope at the atom carries the jump xi^2 w u = 1
    CHECK(std::abs(dir.derivative(1.0) - 2.0) < 1e-13);
    CHECK(std::abs(neu.derivative(1.0) - 1.0) < 1e-13);
}

TEST_CASE("Neumann slope starts from the atom at the base") {
    OperatorSpec spec = make_halfplane(1.0);
    spec.atoms = {{0.0, 2.0}};
    Mesh mesh = build_mesh(spec, 1.0, 16);
    auto [dir, neu] = solve_fundamental(spec, mesh, 2.0);
    CHECK(std::abs(neu.derivative(0.0) - 0.5 * 2.0 * 4.0) < 1e-13);
    CHECK(std::abs(dir.derivative(0.0) - 1.0) < 1e-13);
}

TEST_CASE("bounded solution on the strip") {
    OperatorSpec spec = make_strip(1.0, 1.0);
    SolveOptions opts;
    opts.eval_points = {0.5};
    SpectralSolution sol = solve_bounded(spec, 1.0, opts);
    // phi(y) = sinh(xi (1-y)) / sinh(xi)
    CHECK(std::abs(sol.value(0.0) - 1.0) < 1e-13);
    CHECK(std::abs(sol.value(0.5) - 0.443409441985037) < 1e-12);
    CHECK(sol.y_top() == 1.0);

    PsiResult psi = compute_psi(spec, 1.0, opts);
    CHECK(std::abs(psi.psi - 0.6565176427496656) < 1e-12);
    CHECK(psi.cross_residual < 1e-11);
}

TEST_CASE("bounded solution at zero frequency") {
    OperatorSpec strip = make_strip(1.0, 2.0);
    SolveOptions opts;
    opts.eval_points = {1.0};
    SpectralSolution sol = solve_bounded(strip, 0.0, opts);
    CHECK(std::abs(sol.value(1.0) - 0.5) < 1e-13);  // (R - y)/R
    PsiResult psi = compute_psi(strip, 0.0, opts);
    CHECK(std::abs(psi.psi - 0.25) < 1e-13);  // 1/(2R)

    OperatorSpec half = make_halfplane();
    SpectralSolution flat = solve_bounded(half, 0.0, opts);
    CHECK(std::abs(flat.value(1.0) - 1.0) < 1e-14);
}

TEST_CASE("bounded solution on the half-plane") {
    OperatorSpec spec = make_halfplane();
    SolveOptions opts;
    opts.eval_points = {1.0};
    SpectralSolution sol = solve_bounded(spec, 2.0, opts);
    CHECK(std::abs(sol.value(1.0) - 0.1353352832366127) < 1e-7);
    PsiResult psi = compute_psi(spec, 2.0, opts);
    CHECK(std::abs(psi.psi - 1.0) < 1e-6);
    CHECK(psi.cross_residual < 1e-10);
}

TEST_CASE("Rogers function of a single atom") {
    OperatorSpec spec = make_atom_spec(1.0, 1.0);
    SolveOptions opts;
    opts.trunc_tol = 1e-9;
    PsiResult psi = compute_psi(spec, 1.0, opts);
    // xi^2 w / (2 (1 + xi^2 w y0)) = 1/4
    CHECK(std::abs(psi.psi - 0.25) < 1e-8);
    CHECK(psi.cross_residual < 1e-10);

    PsiResult psi2 = compute_psi(OperatorSpec(make_atom_spec(2.0, 0.5)), 1.0, opts);
    CHECK(std::abs(psi2.psi - 0.5) < 1e-8);
}

TEST_CASE("bounded slice of the atom operator") {
    OperatorSpec spec = make_atom_spec(1.0, 1.0);
    SolveOptions opts;
    opts.trunc_tol = 1e-9;
    opts.eval_points = {1.0};
    SpectralSolution sol = solve_bounded(spec, 1.0, opts);
    CHECK(std::abs(sol.value(1.0) - 0.5) < 1e-8);
}

TEST_CASE("variable coefficients: refinement reaches the tolerance") {
    OperatorSpec spec = make_homogeneous(1.0, 0.0, 0.75);
    SolveOptions opts;
    opts.eval_points = {0.5, 1.0};
    PsiResult psi = compute_psi(spec, 1.0, opts);
    CHECK(psi.cross_residual < 1e-9);
    CHECK(psi.psi.real() > 0.0);
    // scale invariance: psi(c^{ } ...) fixed point is checked at kernel level;
    // here just require a stable positive value
    SpectralSolution sol = solve_bounded(spec, 1.0, opts);
    CHECK(sol.value(0.5).real() > 0.0);
    CHECK(sol.value(0.5).real() < 1.0);
}

TEST_CASE("half-plane with drift matches the shifted-rate formula") {
    // a = 1, b = b0 constant: psi(xi) = (sqrt(xi^2 (1 + b0^2)... ) analytic:
    // modes lambda = -i xi b0 +- sqrt(xi^2 (1 + b0^2) - xi^2 b0^2) = ...
    // bounded solution decays like exp(-(omega - i xi b0) y) with
    // omega = xi sqrt(1 + b0^2 - b0^2) = xi, so phi' (0) = -(omega + i xi b0)
    // and psi = (xi + i xi b0)/2... direct check against the propagator:
    OperatorSpec spec = make_halfplane();
    spec.b = Coefficient::constant(0.5);
    SolveOptions opts;
    PsiResult psi = compute_psi(spec, 2.0, opts);
    // tau = -2 i xi b = -2i, k2 = xi^2 (1 + 0.25) = 5; omega = sqrt(-1+5) = 2
    // decaying mode lambda = tau/2 - omega = -i - 2 -> psi = (2 + i)/: precisely
    // psi = -lambda/2 = (2 + i)/2 = 1 + 0.5i
    CHECK(std::abs(psi.psi - (1.0 + 0.5i)) < 1e-6);
    CHECK(psi.cross_residual < 1e-10);
}

TEST_CASE("imaginary-axis zero scan matches the strip spectrum") {
    OperatorSpec spec = make_strip(1.0, 1.0);
    Mesh mesh = build_mesh(spec, 1.0, 64);
    auto zeros = scan_imaginary_zeros(spec, mesh, 1.0, 2.0, 10.0, 400);
    REQUIRE(zeros.size() == 3);
    CHECK(std::abs(zeros[0] - M_PI) < 1e-8);
    CHECK(std::abs(zeros[1] - 2.0 * M_PI) < 1e-8);
    CHECK(std::abs(zeros[2] - 3.0 * M_PI) < 1e-8);
}

TEST_CASE("no zeros in the right half-plane on a sample grid") {
    OperatorSpec spec = make_strip(1.0, 1.0);
    Mesh mesh = build_mesh(spec, 1.0, 48);
    auto res = check_no_rhp_zeros(spec, mesh, 1.0, linspace(0.1, 5.0, 12), linspace(-6.0, 6.0, 13));
    CHECK(res.min_abs > 1e-6);
}

TEST_CASE("solver is deterministic") {
    OperatorSpec spec = make_homogeneous(1.0, 1.0, 0.8);
    SolveOptions opts;
    opts.eval_points = {0.8};
    PsiResult a = compute_psi(spec, 1.5, opts);
    PsiResult b = compute_psi(spec, 1.5, opts);
    CHECK(a.psi == b.psi);
    CHECK(a.y_top == b.y_top);
}

TEST_CASE("rejected inputs") {
    OperatorSpec spec = make_halfplane();
    CHECK_THROWS_AS(solve_bounded(spec, -1.0, {}), std::invalid_argument);
    CHECK_THROWS_AS(solve_bounded(spec, 1.0i, {}), std::invalid_argument);
    CHECK_THROWS_AS(solve_fundamental_refined(spec, -2.0, 1.0, {}), std::invalid_argument);
}

TEST_CASE("refined fundamental pair agrees with the exact strip values") {
    OperatorSpec spec = make_strip(1.0, 2.0);
    SolveOptions opts;
    opts.eval_points = {1.0};
    auto [dir, neu] = solve_fundamental_refined(spec, 2.0, 0.5, opts);
    CHECK(std::abs(dir.value(1.0) - std::sinh(0.5) / 0.5) < 1e-12);
    CHECK(std::abs(neu.value(1.0) - std::cosh(0.5)) < 1e-12);
    CHECK(std::abs(dir.value(2.0) - std::sinh(1.0) / 0.5) < 1e-12);
}
