#include "spiked/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spiked/errors.hpp"

namespace spiked {

namespace {

// splitmix64; decorrelates seed+stream pairs before feeding mt19937_64.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum Stream : std::uint64_t {
  kStreamHaar = 1,
  kStreamSpike = 2,
  kStreamRotatedU = 3,
  kStreamInit = 4,
  kStreamPcaStart = 5,
};

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

Eigen::VectorXd gaussian_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

void ModelParams::validate() const {
  if (n < 1) throw InvalidParameterError("params: n must be >= 1");
  if (!(lambda > 0.0)) throw InvalidParameterError("params: lambda must be positive");
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw InvalidParameterError("params: rho must lie in [0, 1]");
  }
  if (!(beta > 0.0)) {
    throw InvalidParameterError("params: beta must be positive (inf for beta^{-1}=0)");
  }
}

Eigen::MatrixXd haar_orthogonal(int n, std::uint64_t seed) {
  if (n < 1) throw InvalidParameterError("haar_orthogonal: n must be >= 1");
  std::mt19937_64 rng(mix_seed(seed, kStreamHaar));
  Eigen::MatrixXd gauss(n, n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) gauss(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

std::vector<int> discrete_multiplicities(const std::vector<double>& weights, int n) {
  const int k = static_cast<int>(weights.size());
  std::vector<int> counts(k);
  std::vector<double> remainders(k);
  int assigned = 0;
  for (int j = 0; j < k; ++j) {
    const double exact = n * weights[j];
    counts[j] = static_cast<int>(std::floor(exact));
    remainders[j] = exact - counts[j];
    assigned += counts[j];
  }
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (remainders[a] != remainders[b]) return remainders[a] > remainders[b];
    if (weights[a] != weights[b]) return weights[a] > weights[b];
    return a < b;
  });
  for (int i = 0; assigned < n; ++i, ++assigned) counts[order[i % k]] += 1;
  return counts;
}

namespace {

Eigen::VectorXd build_spectrum(const SpectralMeasure& measure, int n) {
  std::vector<double> values;
  if (measure.is_semicircle()) {
    values = semicircle_quantiles(measure.sigma_star(), n);
  } else {
    const auto& atoms = measure.atoms();
    const auto counts = discrete_multiplicities(measure.weights(), n);
    values.reserve(n);
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      values.insert(values.end(), counts[j], atoms[j]);
    }
    std::sort(values.begin(), values.end());
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(), n);
}

}  // namespace

ModelInstance build_instance(const ModelParams& params, std::uint64_t seed,
                             const BuildOptions& options) {
  params.validate();
  const int n = params.n;
  const bool want_rotation = options.materialize_rotation || options.materialize_j;
  if (options.materialize_j && n > options.dense_cap) {
    throw CapacityError("build_instance: dense J requested beyond cap");
  }

  ModelInstance inst;
  inst.params = params;
  inst.seed = seed;
  inst.d_diag = build_spectrum(params.measure, n);

  std::mt19937_64 spike_rng(mix_seed(seed, kStreamSpike));
  inst.spike = std::sqrt(params.lambda / n) * gaussian_vector(n, spike_rng);

  if (want_rotation) {
    inst.rotation = haar_orthogonal(n, seed);
    inst.u = std::sqrt(static_cast<double>(n)) * (inst.rotation * inst.spike);
  } else {
    // sqrt(N) G V is exactly N(0, lambda I) in law; draw it directly.
    std::mt19937_64 u_rng(mix_seed(seed, kStreamRotatedU));
    inst.u = std::sqrt(params.lambda) * gaussian_vector(n, u_rng);
  }

  if (options.materialize_j) {
    inst.j.noalias() = inst.rotation.transpose() * inst.d_diag.asDiagonal() * inst.rotation;
    inst.j.noalias() += inst.spike * inst.spike.transpose();
  }
  return inst;
}

Eigen::VectorXd init_conditions(const ModelParams& params, InitMode mode,
                                const Eigen::VectorXd& spike_direction,
                                std::uint64_t seed) {
  params.validate();
  const int n = static_cast<int>(spike_direction.size());
  if (n < 1) throw InvalidParameterError("init_conditions: empty spike direction");
  const double rho = params.rho;
  // For InitMode::iid the caller passes sqrt(N) V, for rotated_iid it passes
  // u; both have per-coordinate second moment lambda, so the mixture below
  // satisfies E[(Y0)^2] = 1 and E[dir Y0] = sqrt(lambda) rho in either mode.
  (void)mode;
  std::mt19937_64 rng(mix_seed(seed, kStreamInit));
  Eigen::VectorXd y0 = (rho / std::sqrt(params.lambda)) * spike_direction;
  if (rho < 1.0) {
    y0 += std::sqrt(1.0 - rho * rho) * gaussian_vector(n, rng);
  }
  return y0;
}

PcaResult pca_overlap(const ModelInstance& instance, double tol, int max_iters) {
  if (!instance.has_j()) {
    throw InvalidParameterError("pca_overlap: instance has no materialized J");
  }
  if (!(tol > 0.0)) throw InvalidParameterError("pca_overlap: tol must be positive");
  const Eigen::MatrixXd& j = instance.j;
  const int n = instance.n();

  // |lambda_min| <= ||J||_1; shifting by it makes the top eigenvalue dominant.
  const double shift = j.cwiseAbs().colwise().sum().maxCoeff();

  std::mt19937_64 rng(mix_seed(instance.seed, kStreamPcaStart));
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n) + 1e-3 * gaussian_vector(n, rng);
  x.normalize();

  Eigen::VectorXd jx = j * x;
  double rayleigh = x.dot(jx);
  for (int iter = 1; iter <= max_iters; ++iter) {
    x = jx + shift * x;
    x.normalize();
    jx.noalias() = j * x;
    const double next = x.dot(jx);
    if (std::abs(next - rayleigh) < tol) {
      const double vv = instance.spike.squaredNorm();
      const double proj = x.dot(instance.spike);
      return PcaResult{next, proj * proj / vv, iter};
    }
    rayleigh = next;
  }
  throw NoConvergenceError("pca_overlap: Rayleigh quotient did not settle (near-degenerate top pair?)",
                           tol);
}

}  // namespace spiked
