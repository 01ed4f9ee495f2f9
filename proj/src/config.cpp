#include "spiked/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "spiked/errors.hpp"

namespace spiked {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError("config: unknown key '" + item.key() + "' in '" + where + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& target) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: field '") + key + "' has the wrong type");
  }
}

void read_beta(const json& obj, const char* key, double& target) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (v.is_string()) {
    target = parse_beta(v.get<std::string>());
  } else if (v.is_number()) {
    target = v.get<double>();
  } else {
    throw ConfigError("config: 'beta' must be a number or \"inf\"");
  }
}

void check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError("config: " + message);
}

}  // namespace

double parse_beta(const std::string& text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "inf" || lower == "infinity") {
    return std::numeric_limits<double>::infinity();
  }
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw ConfigError("config: cannot parse beta '" + text + "'");
    return value;
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse beta '" + text + "'");
  }
}

RunConfig RunConfig::from_json(const json& doc) {
  RunConfig cfg;
  require_keys(doc, "<root>",
               {"command", "params", "grid", "solver", "ensemble", "output", "phase"});
  read(doc, "command", cfg.command);

  if (doc.contains("params")) {
    const json& p = doc.at("params");
    require_keys(p, "params",
                 {"n", "lambda", "rho", "beta", "measure", "confinement"});
    read(p, "n", cfg.n);
    read(p, "lambda", cfg.lambda);
    read(p, "rho", cfg.rho);
    read_beta(p, "beta", cfg.beta);
    read(p, "confinement", cfg.confinement);
    if (p.contains("measure")) {
      const json& m = p.at("measure");
      require_keys(m, "params.measure", {"type", "sigma_star", "atoms", "weights", "csv"});
      read(m, "type", cfg.measure_type);
      read(m, "sigma_star", cfg.sigma_star);
      read(m, "atoms", cfg.atoms);
      read(m, "weights", cfg.weights);
      read(m, "csv", cfg.measure_csv);
    }
  }
  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    require_keys(g, "grid", {"t_end", "dt"});
    read(g, "t_end", cfg.t_end);
    read(g, "dt", cfg.dt);
  }
  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    require_keys(s, "solver", {"rule_order", "tol", "max_iter", "route", "k_offdiag_stride"});
    read(s, "rule_order", cfg.rule_order);
    read(s, "tol", cfg.tol);
    read(s, "max_iter", cfg.max_iter);
    read(s, "route", cfg.route);
    read(s, "k_offdiag_stride", cfg.k_offdiag_stride);
  }
  if (doc.contains("ensemble")) {
    const json& e = doc.at("ensemble");
    require_keys(e, "ensemble", {"n_replicas", "base_seed", "coordinate_mode"});
    read(e, "n_replicas", cfg.n_replicas);
    read(e, "base_seed", cfg.base_seed);
    read(e, "coordinate_mode", cfg.coordinate_mode);
  }
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    require_keys(o, "output", {"directory", "format"});
    read(o, "directory", cfg.out_dir);
    read(o, "format", cfg.format);
  }
  if (doc.contains("phase")) {
    const json& ph = doc.at("phase");
    require_keys(ph, "phase",
                 {"lambda_min", "lambda_max", "lambda_steps", "beta_min", "beta_max",
                  "beta_steps"});
    read(ph, "lambda_min", cfg.lambda_min);
    read(ph, "lambda_max", cfg.lambda_max);
    read(ph, "lambda_steps", cfg.lambda_steps);
    read(ph, "beta_min", cfg.beta_min);
    read(ph, "beta_max", cfg.beta_max);
    read(ph, "beta_steps", cfg.beta_steps);
  }
  return cfg;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return from_json(doc);
}

void RunConfig::validate() const {
  check(command == "simulate" || command == "solve" || command == "phase" ||
            command == "compare",
        "command must be one of simulate|solve|phase|compare");
  check(n >= 1, "params.n must be >= 1");
  check(lambda > 0.0, "params.lambda must be positive");
  check(rho >= 0.0 && rho <= 1.0, "params.rho must lie in [0, 1]");
  check(beta > 0.0, "params.beta must be positive (or inf)");
  check(measure_type == "semicircle" || measure_type == "discrete",
        "params.measure.type must be semicircle|discrete");
  if (measure_type == "semicircle") {
    check(sigma_star > 0.0, "params.measure.sigma_star must be positive");
  } else {
    check(!measure_csv.empty() || (!atoms.empty() && atoms.size() == weights.size()),
          "discrete measure needs atoms/weights or a csv path");
  }
  check(confinement == "quadratic", "params.confinement must be 'quadratic'");
  check(t_end > 0.0, "grid.t_end must be positive");
  check(dt > 0.0 && dt <= t_end, "grid.dt must be in (0, t_end]");
  check(rule_order >= 1, "solver.rule_order must be >= 1");
  check(tol > 0.0, "solver.tol must be positive");
  check(max_iter >= 1, "solver.max_iter must be >= 1");
  check(route == "fast" || route == "picard" || route == "both",
        "solver.route must be fast|picard|both");
  check(k_offdiag_stride >= 0, "solver.k_offdiag_stride must be >= 0");
  check(n_replicas >= 1, "ensemble.n_replicas must be >= 1");
  check(coordinate_mode == "direct" || coordinate_mode == "rotated",
        "ensemble.coordinate_mode must be direct|rotated");
  check(format == "csv" || format == "json" || format == "both",
        "output.format must be csv|json|both");
  if (command == "phase") {
    check(measure_type == "semicircle", "phase diagrams require the semicircle measure");
    check(lambda_min > 0.0 && lambda_max >= lambda_min, "phase lambda range invalid");
    check(beta_min > 0.0 && beta_max >= beta_min, "phase beta range invalid");
    check(lambda_steps >= 2 && beta_steps >= 2, "phase steps must be >= 2 per axis");
  }
}

ModelParams RunConfig::model_params() const {
  ModelParams params;
  params.n = n;
  params.lambda = lambda;
  params.rho = rho;
  params.beta = beta;
  if (measure_type == "semicircle") {
    params.measure = SpectralMeasure::semicircle(sigma_star);
  } else if (!measure_csv.empty()) {
    params.measure = SpectralMeasure::discrete_from_csv(measure_csv);
  } else {
    params.measure = SpectralMeasure::discrete(atoms, weights);
  }
  params.confinement = Confinement::quadratic();
  return params;
}

nlohmann::json RunConfig::to_json() const {
  json measure{{"type", measure_type}};
  if (measure_type == "semicircle") {
    measure["sigma_star"] = sigma_star;
  } else if (!measure_csv.empty()) {
    measure["csv"] = measure_csv;
  } else {
    measure["atoms"] = atoms;
    measure["weights"] = weights;
  }
  json beta_field;
  if (std::isinf(beta)) {
    beta_field = "inf";
  } else {
    beta_field = beta;
  }
  return json{
      {"command", command},
      {"params",
       {{"n", n},
        {"lambda", lambda},
        {"rho", rho},
        {"beta", beta_field},
        {"measure", measure},
        {"confinement", confinement}}},
      {"grid", {{"t_end", t_end}, {"dt", dt}}},
      {"solver",
       {{"rule_order", rule_order},
        {"tol", tol},
        {"max_iter", max_iter},
        {"route", route},
        {"k_offdiag_stride", k_offdiag_stride}}},
      {"ensemble",
       {{"n_replicas", n_replicas},
        {"base_seed", base_seed},
        {"coordinate_mode", coordinate_mode}}},
      {"output", {{"directory", out_dir}, {"format", format}}},
      {"phase",
       {{"lambda_min", lambda_min},
        {"lambda_max", lambda_max},
        {"lambda_steps", lambda_steps},
        {"beta_min", beta_min},
        {"beta_max", beta_max},
        {"beta_steps", beta_steps}}},
  };
}

}  // namespace spiked
