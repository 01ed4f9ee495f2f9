#include "spiked/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace spiked {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kWeightSumTol = 1e-12;
constexpr double kExpArgLimit = 700.0;  // double exponent budget

void check_discrete(const std::vector<double>& atoms, const std::vector<double>& weights) {
  if (atoms.empty() || atoms.size() != weights.size()) {
    throw InvalidParameterError("discrete measure: atoms/weights size mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!std::isfinite(atoms[i])) {
      throw InvalidParameterError("discrete measure: non-finite atom");
    }
    if (!(weights[i] > 0.0)) {
      throw InvalidParameterError("discrete measure: weights must be positive");
    }
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > kWeightSumTol) {
    throw InvalidParameterError("discrete measure: weights must sum to 1");
  }
}

}  // namespace

double QuadratureRule::min_node() const {
  return *std::min_element(nodes.begin(), nodes.end());
}

double QuadratureRule::max_node() const {
  return *std::max_element(nodes.begin(), nodes.end());
}

SpectralMeasure SpectralMeasure::semicircle(double sigma_star) {
  if (!(sigma_star > 0.0)) {
    throw InvalidParameterError("semicircle: sigma_star must be positive");
  }
  return SpectralMeasure(Semicircle{sigma_star});
}

SpectralMeasure SpectralMeasure::discrete(std::vector<double> atoms,
                                          std::vector<double> weights) {
  check_discrete(atoms, weights);
  return SpectralMeasure(Discrete{std::move(atoms), std::move(weights)});
}

SpectralMeasure SpectralMeasure::discrete_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidParameterError("cannot open measure CSV: " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw InvalidParameterError("measure CSV is empty: " + path);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "sigma,weight") {
    throw InvalidParameterError("measure CSV must start with header 'sigma,weight'");
  }
  std::vector<double> atoms, weights;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, w;
    if (!std::getline(row, a, ',') || !std::getline(row, w, ',')) {
      throw InvalidParameterError("measure CSV: malformed row '" + line + "'");
    }
    atoms.push_back(std::stod(a));
    weights.push_back(std::stod(w));
  }
  return discrete(std::move(atoms), std::move(weights));
}

double SpectralMeasure::sigma_star() const {
  if (const auto* s = std::get_if<Semicircle>(&body_)) return s->sigma_star;
  throw InvalidParameterError("sigma_star requested on a discrete measure");
}

const std::vector<double>& SpectralMeasure::atoms() const {
  if (const auto* d = std::get_if<Discrete>(&body_)) return d->atoms;
  throw InvalidParameterError("atoms requested on a semicircle measure");
}

const std::vector<double>& SpectralMeasure::weights() const {
  if (const auto* d = std::get_if<Discrete>(&body_)) return d->weights;
  throw InvalidParameterError("weights requested on a semicircle measure");
}

double SpectralMeasure::min_support() const {
  if (const auto* s = std::get_if<Semicircle>(&body_)) return -s->sigma_star;
  const auto& a = atoms();
  return *std::min_element(a.begin(), a.end());
}

double SpectralMeasure::max_support() const {
  if (const auto* s = std::get_if<Semicircle>(&body_)) return s->sigma_star;
  const auto& a = atoms();
  return *std::max_element(a.begin(), a.end());
}

QuadratureRule SpectralMeasure::quadrature(int m) const {
  if (is_semicircle()) return semicircle_quadrature(sigma_star(), m);
  QuadratureRule rule{atoms(), weights(), static_cast<int>(atoms().size())};
  return rule;
}

QuadratureRule semicircle_quadrature(double sigma_star, int m) {
  if (!(sigma_star > 0.0)) {
    throw InvalidParameterError("semicircle_quadrature: sigma_star must be positive");
  }
  if (m < 1) {
    throw InvalidParameterError("semicircle_quadrature: order must be >= 1");
  }
  QuadratureRule rule;
  rule.order = m;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (int i = 1; i <= m; ++i) {
    const double theta = i * kPi / (m + 1);
    rule.nodes[i - 1] = sigma_star * std::cos(theta);
    const double s = std::sin(theta);
    rule.weights[i - 1] = 2.0 / (m + 1) * s * s;
  }
  return rule;
}

double mgf(const QuadratureRule& rule, double w) {
  double max_abs = 0.0;
  for (double x : rule.nodes) max_abs = std::max(max_abs, std::abs(x));
  if (std::abs(w) * max_abs > kExpArgLimit) {
    throw OverflowGuardError("mgf: |w| * max|sigma| exceeds exp budget");
  }
  double sum = 0.0;
  for (int j = 0; j < rule.size(); ++j) {
    sum += rule.weights[j] * std::exp(w * rule.nodes[j]);
  }
  return sum;
}

double mgf(const SpectralMeasure& measure, double w) {
  if (!measure.is_semicircle()) {
    QuadratureRule rule{measure.atoms(), measure.weights(), 0};
    return mgf(rule, w);
  }
  const double s = measure.sigma_star();
  if (std::abs(w) * s > kExpArgLimit) {
    throw OverflowGuardError("mgf: |w| * sigma_star exceeds exp budget");
  }
  // 2 I1(x)/x = sum_k (x^2/4)^k / (k! (k+1)!), with x = sigma_star * w.
  const double q = 0.25 * (s * w) * (s * w);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 1000; ++k) {
    term *= q / (static_cast<double>(k) * (k + 1));
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) break;
  }
  return sum;
}

double stieltjes(const SpectralMeasure& measure, double z) {
  if (measure.is_semicircle()) {
    const double s = measure.sigma_star();
    if (std::abs(z) <= s) {
      throw DomainError("stieltjes: z inside the semicircle support");
    }
    const double root = std::sqrt(z * z - s * s);
    // Odd reflection for z < -sigma_star.
    return z > 0.0 ? 2.0 / (z + root) : 2.0 / (z - root);
  }
  const auto& atoms = measure.atoms();
  const auto& weights = measure.weights();
  if (z >= measure.min_support() && z <= measure.max_support()) {
    throw DomainError("stieltjes: z inside [min support, max support]");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    sum += weights[j] / (z - atoms[j]);
  }
  return sum;
}

double inverse_square_moment(const SpectralMeasure& measure, double z) {
  if (measure.is_semicircle()) {
    const double s = measure.sigma_star();
    if (std::abs(z) <= s) {
      throw DomainError("inverse_square_moment: z inside the semicircle support");
    }
    // -S'(z) simplifies to S(z)/sqrt(z^2 - s^2); even in z.
    const double za = std::abs(z);
    const double root = std::sqrt(za * za - s * s);
    return 2.0 / (root * (za + root));
  }
  const auto& atoms = measure.atoms();
  const auto& weights = measure.weights();
  if (z >= measure.min_support() && z <= measure.max_support()) {
    throw DomainError("inverse_square_moment: z inside [min support, max support]");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    const double d = z - atoms[j];
    sum += weights[j] / (d * d);
  }
  return sum;
}

double semicircle_cdf(double sigma_star, double x) {
  if (x <= -sigma_star) return 0.0;
  if (x >= sigma_star) return 1.0;
  const double u = x / sigma_star;
  return 0.5 + (u * std::sqrt(1.0 - u * u) + std::asin(u)) / kPi;
}

std::vector<double> semicircle_quantiles(double sigma_star, int n) {
  if (!(sigma_star > 0.0)) {
    throw InvalidParameterError("semicircle_quantiles: sigma_star must be positive");
  }
  if (n < 1) {
    throw InvalidParameterError("semicircle_quantiles: n must be >= 1");
  }
  std::vector<double> out(n);
  for (int i = 1; i <= n; ++i) {
    const double p = (i - 0.5) / n;
    double lo = -sigma_star, hi = sigma_star;
    while (hi - lo > 1e-12 * sigma_star) {
      const double mid = 0.5 * (lo + hi);
      (semicircle_cdf(sigma_star, mid) < p ? lo : hi) = mid;
    }
    out[i - 1] = 0.5 * (lo + hi);
  }
  return out;
}

}  // namespace spiked
