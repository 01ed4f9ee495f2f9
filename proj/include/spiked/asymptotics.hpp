#pragma once

#include <string>
#include <vector>

namespace spiked {

enum class Regime {
  below_bbp,         // lambda <= sigma_star/2: recovery impossible
  zero_init,         // rho = 0
  subcritical_noise, // 2 lambda_tilde < s_beta: noise wins
  supercritical,     // 2 lambda_tilde > s_beta and rho > 0
  critical,          // 2 lambda_tilde = s_beta: limit not resolved
};

std::string to_string(Regime regime);

/// Phase-diagram point; limit_corr is NaN exactly when regime == critical.
struct PhasePoint {
  double lambda = 0.0;
  double beta = 0.0;
  double sigma_star = 0.0;
  double rho = 0.0;
  double lambda_tilde = 0.0;
  double s_beta = 0.0;
  Regime regime = Regime::below_bbp;
  double limit_corr = 0.0;
};

/// lambda + sigma_star^2 / (4 lambda): outlier location and g growth rate.
double lambda_tilde(double lambda, double sigma_star);

/// Largest real root of z = beta^{-1} S(z/2) when beta < 1/sigma_star^2,
/// otherwise 2 sigma_star. Bisection cross-checked against the closed form
/// 2 / sqrt(beta (2 - beta sigma_star^2)).
double s_beta(double beta, double sigma_star);

PhasePoint classify(double lambda, double beta, double sigma_star, double rho);

/// 0 below the transition; the explicit product in the supercritical regime.
/// Throws on a critical point.
double limiting_correlation(const PhasePoint& point);

/// Closed-form g(t): the (clamped) pole term plus the branch-cut integral
/// over the semicircle support, evaluated by Gauss-Chebyshev quadrature.
double g_closed_form(double t, double lambda, double sigma_star, double rho);

/// lim e^{-lambda_tilde t} g(t) = sqrt(lambda) rho (1 - sigma_star^2/4 lambda^2)_+.
double g_growth_prefactor(double lambda, double sigma_star, double rho);

/// lim e^{-2 lambda_tilde t} h(t) in the supercritical regime.
double h_growth_prefactor(double lambda, double beta, double sigma_star, double rho);

struct AxisRange {
  double min = 0.0;
  double max = 0.0;
  int steps = 2;  // number of points per axis, >= 2
};

/// classify + limiting_correlation on the Cartesian grid, row-major with
/// lambda as the outer axis.
std::vector<PhasePoint> phase_grid(const AxisRange& lambda_range, const AxisRange& beta_range,
                                   double sigma_star, double rho);

}  // namespace spiked
