#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "spiked/model.hpp"
#include "spiked/time_grid.hpp"

namespace spiked {

/// Finite-N paths of the overlap R^N(t) and autocorrelation K^N(t,t), plus an
/// optional subsampled two-time K^N(t_i, t_j) block.
struct TrajectoryStats {
  TimeGrid grid;
  std::vector<double> overlap;   // R^N at every grid point
  std::vector<double> autocorr;  // K^N(t_k, t_k), nonnegative
  std::vector<int> offdiag_steps;
  Eigen::MatrixXd k_offdiag;     // symmetric on the subsampled grid
  double u_norm2_over_n = 0.0;   // |u|^2/N, the Cauchy-Schwarz envelope
  std::uint64_t seed = 0;
  int replica_id = 0;
};

struct EnsembleStats {
  TimeGrid grid;
  std::vector<double> mean_overlap;
  std::vector<double> stderr_overlap;
  std::vector<double> mean_autocorr;
  std::vector<double> stderr_autocorr;
  int n_replicas = 0;
  std::vector<std::uint64_t> seeds;
};

struct SimOptions {
  int offdiag_stride = 0;  // 0 disables two-time recording
  double blowup_threshold = 1e12;
  // Called with the state at every grid point (before the step); lets tests
  // compare whole paths across coordinate systems.
  std::function<void(int step, const Eigen::VectorXd& state)> observer;
};

/// Fills `out` (already sized N) with the standard Gaussian increments for a
/// given step. Lets tests drive both coordinate systems with shared noise.
using NoiseFn = std::function<void(int step, Eigen::VectorXd& out)>;

/// Seeded per-replica noise stream (one Gaussian vector per step).
NoiseFn seeded_noise(std::uint64_t seed);

/// Euler-Maruyama in original coordinates:
///   X <- X + [J X - f'(K^N) X] dt + sqrt(dt/beta) xi.
TrajectoryStats simulate_direct(const ModelInstance& instance, const Eigen::VectorXd& x0,
                                const TimeGrid& grid, double beta, const NoiseFn& noise,
                                const SimOptions& options = {});
TrajectoryStats simulate_direct(const ModelInstance& instance, const Eigen::VectorXd& x0,
                                const TimeGrid& grid, double beta, std::uint64_t seed,
                                const SimOptions& options = {});

/// Euler-Maruyama in rotated coordinates, O(N) per step, no matrix:
///   Y^i <- Y^i + [u^i R^N + (sigma^i - f'(K^N)) Y^i] dt + sqrt(dt/beta) xi^i.
TrajectoryStats simulate_rotated(const ModelParams& params, const Eigen::VectorXd& d_diag,
                                 const Eigen::VectorXd& u, const Eigen::VectorXd& y0,
                                 const TimeGrid& grid, const NoiseFn& noise,
                                 const SimOptions& options = {});
TrajectoryStats simulate_rotated(const ModelParams& params, const Eigen::VectorXd& d_diag,
                                 const Eigen::VectorXd& u, const Eigen::VectorXd& y0,
                                 const TimeGrid& grid, std::uint64_t seed,
                                 const SimOptions& options = {});

enum class CoordinateMode { direct, rotated };

/// Independent replicas with seeds base_seed + i, run concurrently; the
/// mean/stderr reduction is ordered by replica index, so the result does not
/// depend on scheduling.
EnsembleStats run_ensemble(const ModelParams& params, const TimeGrid& grid, int n_replicas,
                           std::uint64_t base_seed, CoordinateMode mode,
                           const SimOptions& options = {});

}  // namespace spiked
