#pragma once

#include <functional>
#include <vector>

namespace poiskern {

// Poisson kernel of the Laplacian on the upper half-space in R^{d+1},
// evaluated at horizontal offset x - x0 and height y > 0.
double classical_kernel(int d, const std::vector<double>& x, double y, const std::vector<double>& x0);

// Poisson kernel of the Caffarelli-Silvestre extension problem, alpha in
// (0,2).  Normalised to unit mass in x; reduces to classical_kernel at
// alpha = 1.
double cs_kernel(int d, double alpha, const std::vector<double>& x, double y,
                 const std::vector<double>& x0);

struct ProfileValue {
    double f = 0, df = 0, ddf = 0;
};

// Boundary-hit profile at unit height for the scale-invariant operator
// family parametrised by (p, q, mu): mu in (0,2), p >= 0, not both p and q
// zero.  For p > 0 this is the two-sided profile with an arctan tilt; for
// p = 0 it degenerates to a one-sided inverse-exponential power law.
// Values come with analytic first and second derivatives.
class HomogeneousProfile {
public:
    HomogeneousProfile(double p, double q, double mu);

    double operator()(double x) const { return eval(x).f; }
    ProfileValue eval(double x) const;

    double p() const { return p_; }
    double q() const { return q_; }
    double mu() const { return mu_; }
    double normalization() const { return C_; }
    bool one_sided() const { return p_ == 0.0; }

private:
    double p_, q_, mu_;
    double C_ = 0;
    double beta_ = 0;  // one-sided branch only
};

// Max over grid of the homogeneous-family ODE residual
//   (x^2 - 2 mu q x + mu^2(p^2+q^2)) P'' + ((3+mu) x - 4 mu q) P' + (mu+1) P,
// normalised by the local magnitude of the three terms.  The overload
// taking a plain function estimates derivatives by fourth-order central
// differences; the ProfileValue overload uses the supplied derivatives.
double homogeneous_ode_residual(const std::function<ProfileValue(double)>& profile, double p, double q,
                                double mu, const std::vector<double>& grid);
double homogeneous_ode_residual(const std::function<double(double)>& profile, double p, double q,
                                double mu, const std::vector<double>& grid);

// Kernel at height y from the unit-height profile by the family's scaling:
// x' -> y^{-1/mu} P(y^{-1/mu} (x' - x_center)).
std::function<double(double)> scale_kernel(std::function<double(double)> profile, double y, double mu,
                                           double x_center = 0.0);

}  // namespace poiskern
