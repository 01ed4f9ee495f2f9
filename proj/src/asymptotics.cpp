#include "spiked/asymptotics.hpp"

#include <cmath>
#include <limits>

#include "spiked/errors.hpp"
#include "spiked/parallel.hpp"
#include "spiked/spectral.hpp"

namespace spiked {

namespace {

constexpr int kBranchCutOrder = 400;

double beta_inv_of(double beta) {
  if (!(beta > 0.0)) throw InvalidParameterError("beta must be positive (inf allowed)");
  return std::isinf(beta) ? 0.0 : 1.0 / beta;
}

}  // namespace

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::below_bbp: return "below_bbp";
    case Regime::zero_init: return "zero_init";
    case Regime::subcritical_noise: return "subcritical_noise";
    case Regime::supercritical: return "supercritical";
    case Regime::critical: return "critical";
  }
  return "unknown";
}

double lambda_tilde(double lambda, double sigma_star) {
  if (!(lambda > 0.0)) throw InvalidParameterError("lambda_tilde: lambda must be positive");
  return lambda + sigma_star * sigma_star / (4.0 * lambda);
}

double s_beta(double beta, double sigma_star) {
  if (!(beta > 0.0)) throw InvalidParameterError("s_beta: beta must be positive");
  if (!(sigma_star > 0.0)) throw InvalidParameterError("s_beta: sigma_star must be positive");
  const double s2 = sigma_star * sigma_star;
  if (std::isinf(beta) || beta * s2 >= 1.0) return 2.0 * sigma_star;

  // Squaring z = beta^{-1} S(z/2) gives z = 2/sqrt(beta(2 - beta s^2)).
  const double closed = 2.0 / std::sqrt(beta * (2.0 - beta * s2));

  const SpectralMeasure mu = SpectralMeasure::semicircle(sigma_star);
  auto excess = [&](double z) { return z - stieltjes(mu, 0.5 * z) / beta; };
  double lo = 2.0 * sigma_star * (1.0 + 1e-15);
  double hi = 2.0 * sigma_star + 2.0 / (beta * sigma_star);
  // excess < 0 at the left edge (beta s^2 < 1) and > 0 at the bracket top.
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  const double root = 0.5 * (lo + hi);
  if (std::abs(root - closed) > 1e-9) {
    throw InternalInconsistencyError("s_beta: bisection and closed form disagree");
  }
  return root;
}

PhasePoint classify(double lambda, double beta, double sigma_star, double rho) {
  if (!(lambda > 0.0)) throw InvalidParameterError("classify: lambda must be positive");
  if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidParameterError("classify: rho must be in [0,1]");
  PhasePoint p;
  p.lambda = lambda;
  p.beta = beta;
  p.sigma_star = sigma_star;
  p.rho = rho;
  p.lambda_tilde = lambda_tilde(lambda, sigma_star);
  p.s_beta = s_beta(beta, sigma_star);

  if (lambda <= sigma_star / 2.0) {
    p.regime = Regime::below_bbp;
    p.limit_corr = 0.0;
  } else if (rho == 0.0) {
    p.regime = Regime::zero_init;
    p.limit_corr = 0.0;
  } else if (2.0 * p.lambda_tilde < p.s_beta) {
    p.regime = Regime::subcritical_noise;
    p.limit_corr = 0.0;
  } else if (2.0 * p.lambda_tilde > p.s_beta) {
    p.regime = Regime::supercritical;
    p.limit_corr = limiting_correlation(p);
  } else {
    p.regime = Regime::critical;
    p.limit_corr = std::numeric_limits<double>::quiet_NaN();
  }
  return p;
}

double limiting_correlation(const PhasePoint& point) {
  switch (point.regime) {
    case Regime::below_bbp:
    case Regime::zero_init:
    case Regime::subcritical_noise:
      return 0.0;
    case Regime::critical:
      throw InvalidParameterError(
          "limiting_correlation: unset at criticality (2 lambda_tilde = s_beta)");
    case Regime::supercritical:
      break;
  }
  const double beta_inv = beta_inv_of(point.beta);
  const double l = point.lambda;
  const double s2 = point.sigma_star * point.sigma_star;
  return (1.0 - beta_inv / (2.0 * l * point.lambda_tilde)) * (1.0 - s2 / (4.0 * l * l));
}

double g_closed_form(double t, double lambda, double sigma_star, double rho) {
  if (!(lambda > 0.0)) throw InvalidParameterError("g_closed_form: lambda must be positive");
  if (!(t >= 0.0)) throw InvalidParameterError("g_closed_form: t must be nonnegative");
  const double lt = lambda_tilde(lambda, sigma_star);
  if (lt * t > 700.0) throw OverflowGuardError("g_closed_form: lambda_tilde * t too large");

  const double pole_weight =
      std::max(1.0 - sigma_star * sigma_star / (4.0 * lambda * lambda), 0.0);
  // Branch integral (1/2 pi lambda) int e^{xt} sqrt(s^2-x^2)/(lt - x) dx; the
  // density is absorbed into the Gauss-Chebyshev weights, leaving
  // (s^2/4 lambda) E_mu[e^{xt}/(lt - x)].
  const QuadratureRule rule = semicircle_quadrature(sigma_star, kBranchCutOrder);
  double branch = 0.0;
  for (int j = 0; j < rule.size(); ++j) {
    branch += rule.weights[j] * std::exp(rule.nodes[j] * t) / (lt - rule.nodes[j]);
  }
  branch *= sigma_star * sigma_star / (4.0 * lambda);
  return std::sqrt(lambda) * rho * (pole_weight * std::exp(lt * t) + branch);
}

double g_growth_prefactor(double lambda, double sigma_star, double rho) {
  if (!(lambda > 0.0)) throw InvalidParameterError("g_growth_prefactor: lambda must be positive");
  const double clamp =
      std::max(1.0 - sigma_star * sigma_star / (4.0 * lambda * lambda), 0.0);
  return std::sqrt(lambda) * rho * clamp;
}

double h_growth_prefactor(double lambda, double beta, double sigma_star, double rho) {
  const PhasePoint p = classify(lambda, beta, sigma_star, rho);
  if (p.regime != Regime::supercritical) {
    throw InvalidParameterError("h_growth_prefactor: requires the supercritical regime");
  }
  const double beta_inv = beta_inv_of(beta);
  const SpectralMeasure mu = SpectralMeasure::semicircle(sigma_star);
  const double lt = p.lambda_tilde;
  const double clamp = 1.0 - sigma_star * sigma_star / (4.0 * lambda * lambda);
  const double front = 2.0 * lt / (2.0 * lt - beta_inv * stieltjes(mu, lt));
  return front * inverse_square_moment(mu, lt) * lambda * lambda * rho * rho * clamp * clamp;
}

std::vector<PhasePoint> phase_grid(const AxisRange& lambda_range, const AxisRange& beta_range,
                                   double sigma_star, double rho) {
  if (lambda_range.steps < 2 || beta_range.steps < 2) {
    throw InvalidParameterError("phase_grid: need at least 2 points per axis");
  }
  if (!(lambda_range.min > 0.0) || !(beta_range.min > 0.0) ||
      lambda_range.max < lambda_range.min || beta_range.max < beta_range.min) {
    throw InvalidParameterError("phase_grid: ranges must be positive and ordered");
  }
  auto axis_value = [](const AxisRange& r, int i) {
    return r.min + (r.max - r.min) * i / (r.steps - 1);
  };
  const int total = lambda_range.steps * beta_range.steps;
  std::vector<PhasePoint> out(total);
  parallel_for(total, [&](int idx) {
    const int i = idx / beta_range.steps;
    const int j = idx % beta_range.steps;
    try {
      out[idx] = classify(axis_value(lambda_range, i), axis_value(beta_range, j),
                          sigma_star, rho);
    } catch (const Error& e) {
      throw InvalidParameterError("phase_grid cell (" + std::to_string(i) + "," +
                                  std::to_string(j) + "): " + e.what());
    }
  });
  return out;
}

}  // namespace spiked
