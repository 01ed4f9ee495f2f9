#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "spiked/chsck.hpp"
#include "spiked/errors.hpp"
#include "spiked/sde.hpp"

using namespace spiked;

namespace {

ModelParams base_params(int n, double lambda = 1.0, double rho = 0.5, double beta = 10.0) {
  ModelParams p;
  p.n = n;
  p.lambda = lambda;
  p.rho = rho;
  p.beta = beta;
  p.measure = SpectralMeasure::semicircle(1.0);
  return p;
}

ModelParams gradient_flow_params(int n) {
  auto p = base_params(n);
  p.beta = std::numeric_limits<double>::infinity();
  return p;
}

// Scalar zero-noise oracle: Y' = -Y^3 gives K(t) = K0/(1 + 2 K0 t).
double scalar_autocorr(double k0, double t) { return k0 / (1.0 + 2.0 * k0 * t); }

}  // namespace

TEST_CASE("simulate_direct: degenerate scalar follows the cubic-decay ODE") {
  ModelInstance inst;
  inst.params = gradient_flow_params(1);
  inst.d_diag = Eigen::VectorXd::Zero(1);
  inst.spike = Eigen::VectorXd::Zero(1);
  inst.u = Eigen::VectorXd::Zero(1);
  inst.j = Eigen::MatrixXd::Zero(1, 1);

  const double dt = 1e-3;
  const auto grid = TimeGrid::make(1.0, dt);
  Eigen::VectorXd x0(1);
  x0 << 1.0;
  const auto stats =
      simulate_direct(inst, x0, grid, inst.params.beta, std::uint64_t{1});
  CHECK(std::abs(stats.autocorr.back() - scalar_autocorr(1.0, 1.0)) < 2.0 * dt);
  CHECK(stats.overlap.back() == 0.0);
}

TEST_CASE("simulate_direct: zero start is a fixed point of gradient flow") {
  const auto params = gradient_flow_params(40);
  BuildOptions opts;
  opts.materialize_j = true;
  const auto inst = build_instance(params, 2, opts);
  const auto grid = TimeGrid::make(0.5, 1e-2);
  const auto stats =
      simulate_direct(inst, Eigen::VectorXd::Zero(40), grid, params.beta, std::uint64_t{3});
  for (double r : stats.overlap) CHECK(r == 0.0);
  for (double k : stats.autocorr) CHECK(k == 0.0);
}

TEST_CASE("simulate_rotated: zero-noise oracle K = 1/(1+2t)") {
  const int n = 64;
  auto params = gradient_flow_params(n);
  const auto grid = TimeGrid::make(2.0, 1e-3);
  const Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd y0 = Eigen::VectorXd::Ones(n);  // K(0) = 1 exactly
  const auto stats = simulate_rotated(params, d, u, y0, grid, std::uint64_t{5});
  for (double t : {0.5, 1.0, 2.0}) {
    const int k = static_cast<int>(std::round(t / grid.dt));
    CHECK(std::abs(stats.autocorr[k] - scalar_autocorr(1.0, t)) < 2.0 * grid.dt);
  }
}

TEST_CASE("simulate_rotated: warm start at the spike stays put") {
  // rho = 1, lambda = 1, single atom at 0, gradient flow: Y0 = u is a fixed
  // point of the drift, so R stays positive (and constant).
  auto params = gradient_flow_params(1000);
  params.rho = 1.0;
  params.measure = SpectralMeasure::discrete({0.0}, {1.0});
  const auto inst = build_instance(params, 21);
  const auto y0 = init_conditions(params, InitMode::rotated_iid, inst.u, 21);
  const auto grid = TimeGrid::make(1.0, 1e-3);
  const auto stats = simulate_rotated(params, inst.d_diag, inst.u, y0, grid, std::uint64_t{8});
  for (double r : stats.overlap) CHECK(r > 0.0);
  CHECK(stats.overlap.back() == doctest::Approx(stats.overlap.front()).epsilon(1e-9));
}

TEST_CASE("pathwise rotation equivalence under shared increments") {
  const int n = 200;
  const auto params = base_params(n);
  BuildOptions opts;
  opts.materialize_j = true;
  const auto inst = build_instance(params, 31, opts);
  const auto grid = TimeGrid::make(1.0, 1e-3);

  // Master increments xi_k; the rotated run is driven by B = G xi.
  std::mt19937_64 rng(777);
  std::vector<Eigen::VectorXd> xi(grid.n_steps);
  for (auto& v : xi) v = gaussian_vector(n, rng);

  const Eigen::VectorXd x0 = init_conditions(
      params, InitMode::iid, std::sqrt(static_cast<double>(n)) * inst.spike, 31);
  const Eigen::VectorXd y0 = inst.rotation * x0;

  std::vector<Eigen::VectorXd> gx_path, y_path;
  SimOptions opt_direct;
  opt_direct.observer = [&](int, const Eigen::VectorXd& x) {
    gx_path.push_back(inst.rotation * x);
  };
  const auto direct = simulate_direct(
      inst, x0, grid, params.beta,
      [&](int step, Eigen::VectorXd& out) { out = xi[step]; }, opt_direct);

  SimOptions opt_rot;
  opt_rot.observer = [&](int, const Eigen::VectorXd& y) { y_path.push_back(y); };
  const auto rotated = simulate_rotated(
      params, inst.d_diag, inst.u, y0, grid,
      [&](int step, Eigen::VectorXd& out) { out = inst.rotation * xi[step]; }, opt_rot);

  REQUIRE(gx_path.size() == y_path.size());
  double sup = 0.0;
  for (std::size_t k = 0; k < gx_path.size(); ++k) {
    sup = std::max(sup, (gx_path[k] - y_path[k]).norm() / std::sqrt(static_cast<double>(n)));
  }
  CHECK(sup < 1e-8);

  // R and K agree between coordinate systems.
  for (int k = 0; k <= grid.n_steps; ++k) {
    CHECK(std::abs(direct.overlap[k] - rotated.overlap[k]) < 1e-10);
    CHECK(std::abs(direct.autocorr[k] - rotated.autocorr[k]) < 1e-10);
  }
}

TEST_CASE("euler step is first order on the scalar oracle") {
  // u = 1, sigma = 0, beta^{-1} = 0, Y0 = 1/2: R(t) = (1 + 3 e^{-2t})^{-1/2}.
  auto params = gradient_flow_params(1);
  const Eigen::VectorXd d = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd u(1), y0(1);
  u << 1.0;
  y0 << 0.5;
  const double exact = 1.0 / std::sqrt(1.0 + 3.0 * std::exp(-2.0));
  std::vector<double> log_dt, log_err;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    const auto grid = TimeGrid::make(1.0, dt);
    const auto stats = simulate_rotated(params, d, u, y0, grid, std::uint64_t{1});
    log_dt.push_back(std::log(dt));
    log_err.push_back(std::log(std::abs(stats.overlap.back() - exact)));
  }
  const double slope = oracles::fit_slope(log_dt, log_err);
  CHECK(slope > 0.7);
  CHECK(slope < 1.3);
}

TEST_CASE("cauchy-schwarz bound holds at every recorded step") {
  for (std::uint64_t seed : {1ULL, 7ULL, 1234ULL}) {
    const auto params = base_params(100, 1.2, 0.3, 1.0);
    const auto inst = build_instance(params, seed);
    const auto y0 = init_conditions(params, InitMode::rotated_iid, inst.u, seed);
    const auto grid = TimeGrid::make(1.0, 2e-3);
    const auto stats = simulate_rotated(params, inst.d_diag, inst.u, y0, grid, seed);
    for (int k = 0; k <= grid.n_steps; ++k) {
      CHECK(stats.overlap[k] * stats.overlap[k] <=
            stats.autocorr[k] * stats.u_norm2_over_n + 1e-12);
      CHECK(stats.autocorr[k] >= 0.0);
    }
  }
}

TEST_CASE("two-time block is symmetric and matches the diagonal") {
  const auto params = base_params(150);
  const auto inst = build_instance(params, 3);
  const auto y0 = init_conditions(params, InitMode::rotated_iid, inst.u, 3);
  const auto grid = TimeGrid::make(1.0, 1e-2);
  SimOptions options;
  options.offdiag_stride = 20;
  const auto stats =
      simulate_rotated(params, inst.d_diag, inst.u, y0, grid, std::uint64_t{3}, options);
  REQUIRE(stats.offdiag_steps.size() == 6);
  CHECK((stats.k_offdiag - stats.k_offdiag.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t a = 0; a < stats.offdiag_steps.size(); ++a) {
    CHECK(stats.k_offdiag(a, a) ==
          doctest::Approx(stats.autocorr[stats.offdiag_steps[a]]).epsilon(1e-12));
  }
}

TEST_CASE("run_ensemble: determinism, single replica, stderr scale") {
  const auto params = base_params(200);
  const auto grid = TimeGrid::make(0.5, 2e-3);

  const auto a = run_ensemble(params, grid, 4, 100, CoordinateMode::rotated);
  const auto b = run_ensemble(params, grid, 4, 100, CoordinateMode::rotated);
  CHECK(a.mean_overlap == b.mean_overlap);
  CHECK(a.stderr_overlap == b.stderr_overlap);
  CHECK(a.mean_autocorr == b.mean_autocorr);

  const auto single = run_ensemble(params, grid, 1, 100, CoordinateMode::rotated);
  for (double s : single.stderr_overlap) CHECK(s == 0.0);
  for (double s : single.stderr_autocorr) CHECK(s == 0.0);

  CHECK_THROWS_AS(run_ensemble(params, grid, 0, 1, CoordinateMode::rotated),
                  InvalidParameterError);
}

TEST_CASE("run_ensemble: blow-up is reported with the replica index") {
  const auto params = base_params(50);
  const auto grid = TimeGrid::make(20.0, 2.0);
  try {
    run_ensemble(params, grid, 2, 5, CoordinateMode::rotated);
    FAIL("expected blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.replica() >= 0);
    CHECK(std::string(e.what()).find("replica") != std::string::npos);
  }
}

TEST_CASE("ensemble mean tracks the deterministic limit at moderate N") {
  const auto params = base_params(500);
  const auto grid = TimeGrid::make(1.0, 2e-3);
  const auto ens = run_ensemble(params, grid, 8, 2000, CoordinateMode::rotated);

  const auto moments = Moments::from_params(params.lambda, params.rho);
  const auto rule = params.measure.quadrature(200);
  const auto sol = solve_fast(moments, rule, grid, params.beta);

  for (double t : {0.5, 1.0}) {
    const int k = static_cast<int>(std::round(t / grid.dt));
    const double tol = 3.0 * ens.stderr_overlap[k] + 0.01;
    CHECK(std::abs(ens.mean_overlap[k] - sol.overlap[k]) < tol);
    const double tol_k = 3.0 * ens.stderr_autocorr[k] + 0.02;
    CHECK(std::abs(ens.mean_autocorr[k] - sol.autocorr[k]) < tol_k);
  }
}
