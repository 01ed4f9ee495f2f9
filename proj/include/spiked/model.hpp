#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "spiked/spectral.hpp"

namespace spiked {

/// Confining potential descriptor; f' must be nonnegative and Lipschitz.
struct Confinement {
  std::string name = "quadratic";
  std::function<double(double)> fprime = [](double x) { return x; };

  static Confinement quadratic() { return Confinement{}; }
  bool is_quadratic() const { return name == "quadratic"; }
};

struct ModelParams {
  int n = 1000;
  double lambda = 1.0;               // SNR
  double rho = 0.5;                  // initial correlation, in [0, 1]
  double beta = 10.0;                // inverse temperature; +inf means beta^{-1} = 0
  SpectralMeasure measure = SpectralMeasure::semicircle(1.0);
  Confinement confinement = Confinement::quadratic();

  void validate() const;
  double beta_inv() const { return std::isinf(beta) ? 0.0 : 1.0 / beta; }
};

/// One finite-N draw of the spiked matrix model J = V V^T + G^T D G.
///
/// The rotation G and the dense J are optional: rotated-coordinate workflows
/// need only (d_diag, u). Immutable after construction.
struct ModelInstance {
  ModelParams params;
  std::uint64_t seed = 0;
  Eigen::VectorXd d_diag;    // spectrum of the noise part, ascending
  Eigen::VectorXd spike;     // V, entries iid N(0, lambda/N)
  Eigen::VectorXd u;         // sqrt(N) G V (or an equal-law direct draw)
  Eigen::MatrixXd rotation;  // G, empty unless materialized
  Eigen::MatrixXd j;         // empty unless materialized

  bool has_rotation() const { return rotation.size() > 0; }
  bool has_j() const { return j.size() > 0; }
  int n() const { return static_cast<int>(d_diag.size()); }
};

struct BuildOptions {
  bool materialize_j = false;
  bool materialize_rotation = false;  // forced on when materialize_j is set
  int dense_cap = 8192;
};

/// Haar-distributed orthogonal matrix: QR of an iid Gaussian matrix with the
/// R-diagonal sign correction. Deterministic per seed.
Eigen::MatrixXd haar_orthogonal(int n, std::uint64_t seed);

ModelInstance build_instance(const ModelParams& params, std::uint64_t seed,
                             const BuildOptions& options = {});

/// Atom multiplicities for a discrete measure at finite n, largest remainder.
std::vector<int> discrete_multiplicities(const std::vector<double>& weights, int n);

enum class InitMode { iid, rotated_iid };

/// Start vector with E[(Y_0^i)^2] = 1 and E[u^i Y_0^i] = sqrt(lambda) rho:
/// Y_0 = rho u / sqrt(lambda) + sqrt(1 - rho^2) xi. For InitMode::iid the
/// same mixture is taken against sqrt(N) V instead of u.
Eigen::VectorXd init_conditions(const ModelParams& params, InitMode mode,
                                const Eigen::VectorXd& spike_direction,
                                std::uint64_t seed);

struct PcaResult {
  double top_eigenvalue = 0.0;
  double overlap_sq = 0.0;  // (vhat . V)^2 / |V|^2
  int iterations = 0;
};

/// Shifted power iteration on the materialized J; stops when successive
/// Rayleigh quotients differ by less than tol.
PcaResult pca_overlap(const ModelInstance& instance, double tol, int max_iters);

/// Seeded standard-Gaussian vector (one shared stream convention).
Eigen::VectorXd gaussian_vector(int n, std::mt19937_64& rng);

/// Stream-separating seed mix so distinct purposes never share an RNG state.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace spiked
