#include "poiskern/closedform.hpp"

#include <cmath>
#include <stdexcept>

#include "poiskern/specfun.hpp"

namespace poiskern {

namespace {

double sq_dist(const std::vector<double>& x, const std::vector<double>& x0) {
    if (x.size() != x0.size()) throw std::invalid_argument("kernel: dimension mismatch between x and x0");
    double r2 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - x0[i]) * (x[i] - x0[i]);
    return r2;
}

}  // namespace

double classical_kernel(int d, const std::vector<double>& x, double y, const std::vector<double>& x0) {
    if (d < 1 || static_cast<int>(x.size()) != d) throw std::invalid_argument("classical_kernel: bad dimension");
    if (!(y > 0)) throw std::invalid_argument("classical_kernel: need y > 0");
    double r2 = sq_dist(x, x0);
    double c = std::tgamma(0.5 * (d + 1)) / std::pow(M_PI, 0.5 * (d + 1));
    return c * y / std::pow(r2 + y * y, 0.5 * (d + 1));
}

double cs_kernel(int d, double alpha, const std::vector<double>& x, double y,
                 const std::vector<double>& x0) {
    if (d < 1 || static_cast<int>(x.size()) != d) throw std::invalid_argument("cs_kernel: bad dimension");
    if (!(alpha > 0 && alpha < 2)) throw std::invalid_argument("cs_kernel: need alpha in (0,2)");
    if (!(y > 0)) throw std::invalid_argument("cs_kernel: need y > 0");
    double r2 = sq_dist(x, x0);
    // Unit-mass normalisation: integrating y^alpha (|x|^2+y^2)^{-(d+alpha)/2}
    // over R^d gives pi^{d/2} Gamma(alpha/2) / Gamma((d+alpha)/2).
    double c = std::tgamma(0.5 * (d + alpha)) / (std::pow(M_PI, 0.5 * d) * std::tgamma(0.5 * alpha));
    return c * std::pow(y, alpha) * std::pow(r2 + y * y, -0.5 * (d + alpha));
}

HomogeneousProfile::HomogeneousProfile(double p, double q, double mu) : p_(p), q_(q), mu_(mu) {
    if (!(mu > 0 && mu < 2)) throw std::invalid_argument("HomogeneousProfile: need mu in (0,2)");
    if (p < 0) throw std::invalid_argument("HomogeneousProfile: need p >= 0");
    if (p == 0 && q == 0) throw std::invalid_argument("HomogeneousProfile: p and q cannot both vanish");
    if (p > 0) {
        std::complex<double> z(0.5 * (1 + mu), 0.5 * (1 - mu) * q / p);
        // the argument stays in the right half-plane for every mu in (0,2)
        C_ = std::pow(2 * mu * p, mu) / (2 * M_PI * std::tgamma(mu)) * abs_gamma_squared(z);
    } else {
        if (mu == 1.0)
            throw std::invalid_argument(
                "HomogeneousProfile: p = 0, mu = 1 is a pure drift; the hit law is a point mass");
        beta_ = mu * q * (1 - mu);
        C_ = std::pow(std::abs(beta_), mu) / std::tgamma(mu);
    }
}

ProfileValue HomogeneousProfile::eval(double x) const {
    ProfileValue out;
    const double w = x - mu_ * q_;
    if (p_ > 0) {
        const double m = mu_ * p_;
        const double s = m * m + w * w;
        double g = ((1 - mu_) * q_ / p_) * std::atan(w / m);
        double f = C_ * std::exp(g) * std::pow(s, -0.5 * (mu_ + 1));
        // logarithmic derivative T = P'/P and its derivative
        double N = (1 - mu_) * mu_ * q_ - (mu_ + 1) * w;
        double T = N / s;
        double Tp = -(mu_ + 1) / s - 2 * w * N / (s * s);
        out.f = f;
        out.df = f * T;
        out.ddf = f * (T * T + Tp);
        return out;
    }
    // one-sided branch: support where w has the sign of beta
    if (w == 0.0 || (w > 0) != (beta_ > 0)) return out;  // zeros
    double lf = -beta_ / w - (mu_ + 1) * std::log(std::abs(w)) + std::log(C_);
    if (lf < -745.0) return out;  // underflow: the profile is numerically zero
    double f = std::exp(lf);
    double T = beta_ / (w * w) - (mu_ + 1) / w;
    double Tp = -2 * beta_ / (w * w * w) + (mu_ + 1) / (w * w);
    out.f = f;
    out.df = f * T;
    out.ddf = f * (T * T + Tp);
    return out;
}

namespace {

double residual_at(double x, const ProfileValue& v, double p, double q, double mu) {
    double A = x * x - 2 * mu * q * x + mu * mu * (p * p + q * q);
    double B = (3 + mu) * x - 4 * mu * q;
    double lhs = A * v.ddf + B * v.df + (mu + 1) * v.f;
    double scale = std::abs(A * v.ddf) + std::abs(B * v.df) + (mu + 1) * std::abs(v.f);
    if (scale == 0) return 0;
    return std::abs(lhs) / scale;
}

}  // namespace

double homogeneous_ode_residual(const std::function<ProfileValue(double)>& profile, double p, double q,
                                double mu, const std::vector<double>& grid) {
    double worst = 0;
    for (double x : grid) worst = std::max(worst, residual_at(x, profile(x), p, q, mu));
    return worst;
}

double homogeneous_ode_residual(const std::function<double(double)>& profile, double p, double q,
                                double mu, const std::vector<double>& grid) {
    auto with_fd = [&](double x) {
        double h = 1e-3 * (1.0 + std::abs(x));
        double fm2 = profile(x - 2 * h), fm1 = profile(x - h);
        double f0 = profile(x);
        double fp1 = profile(x + h), fp2 = profile(x + 2 * h);
        ProfileValue v;
        v.f = f0;
        v.df = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h);
        v.ddf = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h);
        return v;
    };
    return homogeneous_ode_residual(std::function<ProfileValue(double)>(with_fd), p, q, mu, grid);
}

std::function<double(double)> scale_kernel(std::function<double(double)> profile, double y, double mu,
                                           double x_center) {
    if (!(y > 0)) throw std::invalid_argument("scale_kernel: need y > 0");
    if (!(mu > 0 && mu < 2)) throw std::invalid_argument("scale_kernel: need mu in (0,2)");
    double s = std::pow(y, -1.0 / mu);
    return [profile = std::move(profile), s, x_center](double xp) {
        return s * profile(s * (xp - x_center));
    };
}

}  // namespace poiskern
