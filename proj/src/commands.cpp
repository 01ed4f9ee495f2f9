#include "spiked/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>

#include "spiked/chsck.hpp"
#include "spiked/errors.hpp"
#include "spiked/io.hpp"
#include "spiked/sde.hpp"

namespace spiked {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

std::string out_path(const RunConfig& config, const std::string& name) {
  fs::create_directories(config.out_dir);
  return (fs::path(config.out_dir) / name).string();
}

bool write_csv_files(const RunConfig& config) { return config.format != "json"; }
bool write_json_files(const RunConfig& config) { return config.format != "csv"; }

json solution_to_json(const ChsckSolution& sol) {
  std::vector<double> t(sol.grid.n_points());
  for (int k = 0; k < sol.grid.n_points(); ++k) t[k] = sol.grid.time(k);
  return json{{"t", t},           {"g", sol.g},           {"F", sol.big_f},
              {"h", sol.h},       {"R", sol.overlap},     {"K", sol.autocorr},
              {"corr_ratio", sol.corr_ratio}};
}

json ensemble_to_json(const EnsembleStats& stats) {
  std::vector<double> t(stats.grid.n_points());
  for (int k = 0; k < stats.grid.n_points(); ++k) t[k] = stats.grid.time(k);
  return json{{"t", t},
              {"mean_R", stats.mean_overlap},
              {"stderr_R", stats.stderr_overlap},
              {"mean_K", stats.mean_autocorr},
              {"stderr_K", stats.stderr_autocorr}};
}

// Rebuilds (g, F, h) from a diagonal-only solve: F = exp(2 int f'(K)),
// g = R sqrt(F), h = K F. Keeps the solution CSV schema uniform across routes.
void fill_transformed_from_rk(ChsckSolution& sol, const std::function<double(double)>& fprime) {
  const int points = sol.grid.n_points();
  sol.g.resize(points);
  sol.big_f.resize(points);
  sol.h.resize(points);
  double e_cum = 0.0;
  double fp_prev = fprime(sol.autocorr[0]);
  for (int k = 0; k < points; ++k) {
    if (k > 0) {
      const double fp = fprime(sol.autocorr[k]);
      e_cum += 0.5 * sol.grid.dt * (fp_prev + fp);
      fp_prev = fp;
    }
    const double big_f = std::exp(2.0 * e_cum);
    sol.big_f[k] = big_f;
    sol.g[k] = sol.overlap[k] * std::exp(e_cum);
    sol.h[k] = sol.autocorr[k] * big_f;
  }
}

struct SolveOutput {
  ChsckSolution solution;
  json diagnostics;
};

SolveOutput run_solver(const RunConfig& config) {
  const ModelParams params = config.model_params();
  const Moments moments = Moments::from_params(params.lambda, params.rho);
  const QuadratureRule rule = params.measure.quadrature(config.rule_order);
  const TimeGrid grid = TimeGrid::make(config.t_end, config.dt);

  SolveOutput out;
  out.diagnostics["route"] = config.route;
  if (config.route == "fast") {
    out.solution = solve_fast(moments, rule, grid, params.beta);
  } else if (config.route == "picard") {
    PicardResult picard =
        solve_picard_general(params.confinement.fprime, params.beta, moments, rule, grid,
                             PicardOptions{config.tol, config.max_iter});
    out.solution.grid = grid;
    out.solution.rule = rule;
    out.solution.moments = moments;
    out.solution.route = "picard";
    out.solution.overlap = std::move(picard.overlap);
    out.solution.autocorr = std::move(picard.autocorr);
    fill_transformed_from_rk(out.solution, params.confinement.fprime);
    out.solution.corr_ratio = correlation_ratio(out.solution);
    out.solution.picard_iterations = picard.iterations;
    out.solution.picard_residual = picard.residual;
    out.diagnostics["iterations"] = picard.iterations;
    out.diagnostics["residual"] = picard.residual;
    out.diagnostics["h_factor_min"] = picard.h_factor_min;
    out.diagnostics["h_factor_max"] = picard.h_factor_max;
    out.diagnostics["dh_integral_max"] = picard.dh_integral_max;
  } else {  // both: report the fast solution, record the route discrepancy
    out.solution = solve_fast(moments, rule, grid, params.beta);
    PicardResult picard =
        solve_picard_general(params.confinement.fprime, params.beta, moments, rule, grid,
                             PicardOptions{config.tol, config.max_iter});
    double sup_r = 0.0, sup_k = 0.0;
    for (int k = 0; k < grid.n_points(); ++k) {
      sup_r = std::max(sup_r, std::abs(out.solution.overlap[k] - picard.overlap[k]));
      sup_k = std::max(sup_k, std::abs(out.solution.autocorr[k] - picard.autocorr[k]));
    }
    out.diagnostics["iterations"] = picard.iterations;
    out.diagnostics["residual"] = picard.residual;
    out.diagnostics["route_discrepancy_R"] = sup_r;
    out.diagnostics["route_discrepancy_K"] = sup_k;
    out.diagnostics["route_discrepancy_sup"] = std::max(sup_r, sup_k);
  }
  out.diagnostics["scale_shift"] = out.solution.scale_shift;
  out.diagnostics["rule_order"] = rule.order;
  out.diagnostics["dt"] = grid.dt;
  out.diagnostics["tol"] = config.tol;
  return out;
}

}  // namespace

json cmd_solve(const RunConfig& config) {
  config.validate();
  const auto start = clock_type::now();
  SolveOutput out = run_solver(config);

  if (write_csv_files(config)) {
    io::write_solution_csv(out_path(config, "chsck_solution.csv"), out.solution);
  }
  if (write_json_files(config)) {
    io::write_json(out_path(config, "chsck_solution.json"), solution_to_json(out.solution));
  }
  if (config.k_offdiag_stride > 0) {
    const ModelParams params = config.model_params();
    std::vector<int> steps;
    const Eigen::MatrixXd k_offdiag = evaluate_k_offdiag(
        out.solution.overlap, out.solution.autocorr, params.confinement.fprime, params.beta,
        out.solution.moments, out.solution.rule, out.solution.grid,
        config.k_offdiag_stride, &steps);
    if (write_csv_files(config)) {
      io::write_offdiag_csv(out_path(config, "K_offdiag.csv"), out.solution.grid, steps,
                            k_offdiag);
    }
  }

  json run = {{"config", config.to_json()}, {"diagnostics", out.diagnostics}};
  run["diagnostics"]["runtime_seconds"] = seconds_since(start);
  io::write_json(out_path(config, "run.json"), run);
  return run;
}

json cmd_simulate(const RunConfig& config) {
  config.validate();
  const auto start = clock_type::now();
  const ModelParams params = config.model_params();
  const TimeGrid grid = TimeGrid::make(config.t_end, config.dt);
  const CoordinateMode mode =
      config.coordinate_mode == "direct" ? CoordinateMode::direct : CoordinateMode::rotated;

  const EnsembleStats stats =
      run_ensemble(params, grid, config.n_replicas, config.base_seed, mode);

  if (write_csv_files(config)) {
    io::write_ensemble_csv(out_path(config, "ensemble.csv"), stats);
  }
  if (write_json_files(config)) {
    io::write_json(out_path(config, "ensemble.json"), ensemble_to_json(stats));
  }

  json run = {{"config", config.to_json()},
              {"seeds", stats.seeds},
              {"diagnostics",
               {{"n_replicas", stats.n_replicas},
                {"coordinate_mode", config.coordinate_mode}}}};
  run["diagnostics"]["runtime_seconds"] = seconds_since(start);
  io::write_json(out_path(config, "run.json"), run);
  return run;
}

json cmd_phase(const RunConfig& config) {
  config.validate();
  const auto start = clock_type::now();
  const AxisRange lambda_range{config.lambda_min, config.lambda_max, config.lambda_steps};
  const AxisRange beta_range{config.beta_min, config.beta_max, config.beta_steps};
  const auto points = phase_grid(lambda_range, beta_range, config.sigma_star, config.rho);

  if (write_csv_files(config)) {
    io::write_phase_csv(out_path(config, "phase.csv"), points);
  }
  if (write_json_files(config)) {
    json rows = json::array();
    for (const auto& p : points) {
      rows.push_back({{"lambda", p.lambda},
                      {"beta", p.beta},
                      {"lambda_tilde", p.lambda_tilde},
                      {"s_beta", p.s_beta},
                      {"regime", to_string(p.regime)},
                      {"limit_corr", p.limit_corr}});
    }
    io::write_json(out_path(config, "phase.json"), rows);
  }

  json run = {{"config", config.to_json()},
              {"diagnostics", {{"points", static_cast<int>(points.size())}}}};
  run["diagnostics"]["runtime_seconds"] = seconds_since(start);
  io::write_json(out_path(config, "run.json"), run);
  return run;
}

json cmd_compare(const RunConfig& config) {
  config.validate();
  const auto start = clock_type::now();
  const ModelParams params = config.model_params();
  const TimeGrid grid = TimeGrid::make(config.t_end, config.dt);
  const CoordinateMode mode =
      config.coordinate_mode == "direct" ? CoordinateMode::direct : CoordinateMode::rotated;

  SolveOutput solved = run_solver(config);
  const EnsembleStats stats =
      run_ensemble(params, grid, config.n_replicas, config.base_seed, mode);

  double sup_r = 0.0, sup_k = 0.0;
  for (int k = 0; k < grid.n_points(); ++k) {
    sup_r = std::max(sup_r, std::abs(stats.mean_overlap[k] - solved.solution.overlap[k]));
    sup_k = std::max(sup_k, std::abs(stats.mean_autocorr[k] - solved.solution.autocorr[k]));
  }

  if (write_csv_files(config)) {
    io::write_compare_csv(out_path(config, "compare.csv"), grid, stats.mean_overlap,
                          solved.solution.overlap, stats.mean_autocorr,
                          solved.solution.autocorr, stats.stderr_overlap);
  }

  json run = {{"config", config.to_json()},
              {"seeds", stats.seeds},
              {"summary",
               {{"sup_abs_err_R", sup_r},
                {"sup_abs_err_K", sup_k},
                {"n_replicas", stats.n_replicas}}},
              {"diagnostics", solved.diagnostics}};
  run["diagnostics"]["runtime_seconds"] = seconds_since(start);
  io::write_json(out_path(config, "run.json"), run);
  return run;
}

int run_command(const RunConfig& config) {
  try {
    if (config.command == "solve") {
      cmd_solve(config);
    } else if (config.command == "simulate") {
      cmd_simulate(config);
    } else if (config.command == "phase") {
      cmd_phase(config);
    } else if (config.command == "compare") {
      cmd_compare(config);
    } else {
      throw ConfigError("config: unknown command '" + config.command + "'");
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NoConvergenceError& e) {
    std::cerr << "error: " << e.what() << " (residual " << e.residual() << ")\n";
    return kExitSolver;
  } catch (const BlowUpError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSimulation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace spiked
