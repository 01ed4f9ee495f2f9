#include "spiked/sde.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "spiked/errors.hpp"
#include "spiked/parallel.hpp"

namespace spiked {

namespace {

constexpr std::uint64_t kStreamSdeNoise = 6;

struct Recorder {
  TrajectoryStats stats;
  std::vector<Eigen::VectorXd> snapshots;
  int stride;

  Recorder(const TimeGrid& grid, const SimOptions& options, double u_norm2_over_n,
           std::uint64_t seed)
      : stride(options.offdiag_stride) {
    stats.grid = grid;
    stats.overlap.reserve(grid.n_points());
    stats.autocorr.reserve(grid.n_points());
    stats.u_norm2_over_n = u_norm2_over_n;
    stats.seed = seed;
  }

  void record(int step, double r, double k, const Eigen::VectorXd& state) {
    stats.overlap.push_back(r);
    stats.autocorr.push_back(k);
    if (stride > 0 && step % stride == 0) {
      stats.offdiag_steps.push_back(step);
      snapshots.push_back(state);
    }
  }

  TrajectoryStats finish() {
    const int m = static_cast<int>(snapshots.size());
    if (m > 0) {
      const double n = static_cast<double>(snapshots.front().size());
      stats.k_offdiag.resize(m, m);
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b <= a; ++b) {
          const double v = snapshots[a].dot(snapshots[b]) / n;
          stats.k_offdiag(a, b) = v;
          stats.k_offdiag(b, a) = v;
        }
      }
    }
    return std::move(stats);
  }
};

void check_blowup(double k, int step, double threshold) {
  if (!(k < threshold)) {
    throw BlowUpError("simulation blow-up: K^N = " + std::to_string(k) +
                          " at step " + std::to_string(step) + " (dt too large?)",
                      step);
  }
}

}  // namespace

NoiseFn seeded_noise(std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(mix_seed(seed, kStreamSdeNoise));
  return [rng](int /*step*/, Eigen::VectorXd& out) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal(*rng);
  };
}

TrajectoryStats simulate_direct(const ModelInstance& instance, const Eigen::VectorXd& x0,
                                const TimeGrid& grid, double beta, const NoiseFn& noise,
                                const SimOptions& options) {
  if (!instance.has_j()) {
    throw InvalidParameterError("simulate_direct: instance has no materialized J");
  }
  if (!(beta > 0.0)) throw InvalidParameterError("simulate_direct: beta must be positive");
  const int n = instance.n();
  if (x0.size() != n) throw InvalidParameterError("simulate_direct: x0 size mismatch");

  const auto& fprime = instance.params.confinement.fprime;
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double noise_scale = std::isinf(beta) ? 0.0 : std::sqrt(grid.dt / beta);

  // The direct-coordinate envelope is |sqrt(N) V|^2 / N = |V|^2.
  Recorder rec(grid, options, instance.spike.squaredNorm(), instance.seed);

  Eigen::VectorXd x = x0, drift(n), xi(n);
  for (int step = 0; step <= grid.n_steps; ++step) {
    const double k = x.squaredNorm() / n;
    const double r = sqrt_n * instance.spike.dot(x) / n;  // (1/N) sum sqrt(N)V^i X^i
    check_blowup(k, step, options.blowup_threshold);
    rec.record(step, r, k, x);
    if (options.observer) options.observer(step, x);
    if (step == grid.n_steps) break;

    drift.noalias() = instance.j * x;
    x += grid.dt * (drift - fprime(k) * x);
    if (noise_scale != 0.0) {
      noise(step, xi);
      x += noise_scale * xi;
    }
  }
  return rec.finish();
}

TrajectoryStats simulate_direct(const ModelInstance& instance, const Eigen::VectorXd& x0,
                                const TimeGrid& grid, double beta, std::uint64_t seed,
                                const SimOptions& options) {
  auto stats = simulate_direct(instance, x0, grid, beta, seeded_noise(seed), options);
  stats.seed = seed;
  return stats;
}

TrajectoryStats simulate_rotated(const ModelParams& params, const Eigen::VectorXd& d_diag,
                                 const Eigen::VectorXd& u, const Eigen::VectorXd& y0,
                                 const TimeGrid& grid, const NoiseFn& noise,
                                 const SimOptions& options) {
  params.validate();
  const int n = static_cast<int>(d_diag.size());
  if (u.size() != n || y0.size() != n) {
    throw InvalidParameterError("simulate_rotated: size mismatch");
  }
  const auto& fprime = params.confinement.fprime;
  const double beta = params.beta;
  const double noise_scale = std::isinf(beta) ? 0.0 : std::sqrt(grid.dt / beta);

  Recorder rec(grid, options, u.squaredNorm() / n, 0);

  Eigen::VectorXd y = y0, xi(n);
  for (int step = 0; step <= grid.n_steps; ++step) {
    const double k = y.squaredNorm() / n;
    const double r = u.dot(y) / n;
    check_blowup(k, step, options.blowup_threshold);
    rec.record(step, r, k, y);
    if (options.observer) options.observer(step, y);
    if (step == grid.n_steps) break;

    const double fp = fprime(k);
    y = y + grid.dt * (r * u + (d_diag.array() - fp).matrix().cwiseProduct(y));
    if (noise_scale != 0.0) {
      noise(step, xi);
      y += noise_scale * xi;
    }
  }
  return rec.finish();
}

TrajectoryStats simulate_rotated(const ModelParams& params, const Eigen::VectorXd& d_diag,
                                 const Eigen::VectorXd& u, const Eigen::VectorXd& y0,
                                 const TimeGrid& grid, std::uint64_t seed,
                                 const SimOptions& options) {
  auto stats = simulate_rotated(params, d_diag, u, y0, grid, seeded_noise(seed), options);
  stats.seed = seed;
  return stats;
}

EnsembleStats run_ensemble(const ModelParams& params, const TimeGrid& grid, int n_replicas,
                           std::uint64_t base_seed, CoordinateMode mode,
                           const SimOptions& options) {
  params.validate();
  if (n_replicas < 1) throw InvalidParameterError("run_ensemble: n_replicas must be >= 1");

  std::vector<TrajectoryStats> replicas(n_replicas);
  parallel_for(n_replicas, [&](int i) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
    try {
      BuildOptions build;
      build.materialize_j = (mode == CoordinateMode::direct);
      const ModelInstance inst = build_instance(params, seed, build);
      if (mode == CoordinateMode::direct) {
        const Eigen::VectorXd x0 = init_conditions(
            params, InitMode::iid,
            std::sqrt(static_cast<double>(params.n)) * inst.spike, seed);
        replicas[i] = simulate_direct(inst, x0, grid, params.beta, seed, options);
      } else {
        const Eigen::VectorXd y0 =
            init_conditions(params, InitMode::rotated_iid, inst.u, seed);
        replicas[i] = simulate_rotated(params, inst.d_diag, inst.u, y0, grid, seed, options);
      }
      replicas[i].replica_id = i;
    } catch (const BlowUpError& e) {
      throw BlowUpError(std::string(e.what()) + " [replica " + std::to_string(i) + "]",
                        e.step(), i);
    }
  });

  EnsembleStats out;
  out.grid = grid;
  out.n_replicas = n_replicas;
  const int points = grid.n_points();
  out.mean_overlap.assign(points, 0.0);
  out.mean_autocorr.assign(points, 0.0);
  out.stderr_overlap.assign(points, 0.0);
  out.stderr_autocorr.assign(points, 0.0);
  out.seeds.reserve(n_replicas);
  for (int i = 0; i < n_replicas; ++i) out.seeds.push_back(replicas[i].seed);

  for (int k = 0; k < points; ++k) {
    double mr = 0.0, mk = 0.0;
    for (int i = 0; i < n_replicas; ++i) {
      mr += replicas[i].overlap[k];
      mk += replicas[i].autocorr[k];
    }
    mr /= n_replicas;
    mk /= n_replicas;
    out.mean_overlap[k] = mr;
    out.mean_autocorr[k] = mk;
    if (n_replicas > 1) {
      double vr = 0.0, vk = 0.0;
      for (int i = 0; i < n_replicas; ++i) {
        vr += (replicas[i].overlap[k] - mr) * (replicas[i].overlap[k] - mr);
        vk += (replicas[i].autocorr[k] - mk) * (replicas[i].autocorr[k] - mk);
      }
      out.stderr_overlap[k] = std::sqrt(vr / (n_replicas - 1) / n_replicas);
      out.stderr_autocorr[k] = std::sqrt(vk / (n_replicas - 1) / n_replicas);
    }
  }
  return out;
}

}  // namespace spiked
