#pragma once

#include <string>
#include <variant>
#include <vector>

#include "spiked/errors.hpp"

namespace spiked {

/// Probability rule discretizing E_{sigma ~ mu_D}[.] as a finite sum.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;

  int size() const { return static_cast<int>(nodes.size()); }
  double min_node() const;
  double max_node() const;
};

/// Compactly supported noise spectrum: scaled semicircle or discrete atoms.
///
/// Immutable after construction; safe to share across threads.
class SpectralMeasure {
 public:
  static SpectralMeasure semicircle(double sigma_star);
  static SpectralMeasure discrete(std::vector<double> atoms, std::vector<double> weights);
  /// Two-column CSV with header "sigma,weight".
  static SpectralMeasure discrete_from_csv(const std::string& path);

  bool is_semicircle() const { return std::holds_alternative<Semicircle>(body_); }
  double sigma_star() const;
  const std::vector<double>& atoms() const;
  const std::vector<double>& weights() const;

  double min_support() const;
  double max_support() const;

  /// Gauss-Chebyshev rule of order m for the semicircle; atoms verbatim for
  /// discrete measures (m is ignored there).
  QuadratureRule quadrature(int m) const;

 private:
  struct Semicircle {
    double sigma_star;
  };
  struct Discrete {
    std::vector<double> atoms;
    std::vector<double> weights;
  };
  explicit SpectralMeasure(Semicircle s) : body_(s) {}
  explicit SpectralMeasure(Discrete d) : body_(std::move(d)) {}

  std::variant<Semicircle, Discrete> body_;
};

/// Default rule order used by the deterministic solvers.
inline constexpr int kDefaultRuleOrder = 200;

/// Gauss-Chebyshev second kind: nodes sigma*cos(i pi/(m+1)), weights
/// 2/(m+1) sin^2(i pi/(m+1)). The weight function is exactly the semicircle
/// density, so moments up to degree 2m-1 are integrated exactly.
QuadratureRule semicircle_quadrature(double sigma_star, int m);

/// E[exp(w sigma)] as the exact finite sum over the rule.
double mgf(const QuadratureRule& rule, double w);

/// E[exp(w sigma)]; semicircle variant uses the Bessel series 2 I1(sw)/(sw).
double mgf(const SpectralMeasure& measure, double w);

/// Stieltjes transform E[1/(z - sigma)], z outside the closed support.
double stieltjes(const SpectralMeasure& measure, double z);

/// E[1/(z - sigma)^2] = -S'(z), z outside the closed support.
double inverse_square_moment(const SpectralMeasure& measure, double z);

/// Deterministic spectrum sigma^i = F^{-1}((i - 1/2)/n), ascending.
std::vector<double> semicircle_quantiles(double sigma_star, int n);

/// CDF of the semicircle law on [-sigma_star, sigma_star].
double semicircle_cdf(double sigma_star, double x);

}  // namespace spiked
