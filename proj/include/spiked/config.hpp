#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spiked/model.hpp"

namespace spiked {

/// One archivable run description: JSON file plus flag overrides (flags win).
/// Parsing is strict: unknown keys and out-of-range values are rejected.
struct RunConfig {
  std::string command;  // simulate | solve | phase | compare

  // params
  int n = 1000;
  double lambda = 1.0;
  double rho = 0.5;
  double beta = 10.0;  // +inf encodes beta^{-1} = 0 ("inf" in JSON/flags)
  std::string measure_type = "semicircle";  // semicircle | discrete
  double sigma_star = 1.0;
  std::vector<double> atoms;
  std::vector<double> weights;
  std::string measure_csv;  // alternative source for a discrete measure
  std::string confinement = "quadratic";

  // grid
  double t_end = 10.0;
  double dt = 1e-3;

  // solver
  int rule_order = 200;
  double tol = 1e-8;
  int max_iter = 200;
  std::string route = "fast";  // fast | picard | both
  int k_offdiag_stride = 0;    // > 0 writes the two-time CSV at this stride

  // ensemble
  int n_replicas = 8;
  std::uint64_t base_seed = 1;
  std::string coordinate_mode = "rotated";  // direct | rotated

  // output
  std::string out_dir = ".";
  std::string format = "both";  // csv | json | both

  // phase
  double lambda_min = 0.3;
  double lambda_max = 2.0;
  int lambda_steps = 10;
  double beta_min = 0.2;
  double beta_max = 5.0;
  int beta_steps = 10;

  void validate() const;                // throws ConfigError
  ModelParams model_params() const;     // builds the measure
  nlohmann::json to_json() const;       // full echo for run.json

  static RunConfig from_json(const nlohmann::json& doc);
  static RunConfig from_json_file(const std::string& path);
};

/// Parses "inf" (any case) or a positive number; throws ConfigError otherwise.
double parse_beta(const std::string& text);

}  // namespace spiked
