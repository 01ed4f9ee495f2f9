#include "spiked/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "spiked/errors.hpp"

namespace spiked::io {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: no platform newline mangling
  if (!out) throw Error("cannot open output file: " + path);
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_solution_csv(const std::string& path, const ChsckSolution& solution) {
  auto out = open_out(path);
  out << "t,g,F,h,R,K,corr_ratio\n";
  for (int k = 0; k < solution.grid.n_points(); ++k) {
    out << format_double(solution.grid.time(k)) << ',' << format_double(solution.g[k])
        << ',' << format_double(solution.big_f[k]) << ',' << format_double(solution.h[k])
        << ',' << format_double(solution.overlap[k]) << ','
        << format_double(solution.autocorr[k]) << ','
        << format_double(solution.corr_ratio[k]) << '\n';
  }
}

void write_offdiag_csv(const std::string& path, const TimeGrid& grid,
                       const std::vector<int>& steps, const Eigen::MatrixXd& k_offdiag) {
  auto out = open_out(path);
  out << "t,s,K\n";
  for (std::size_t a = 0; a < steps.size(); ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      out << format_double(grid.time(steps[a])) << ',' << format_double(grid.time(steps[b]))
          << ',' << format_double(k_offdiag(a, b)) << '\n';
    }
  }
}

void write_trajectory_csv(const std::string& path, const TrajectoryStats& stats) {
  auto out = open_out(path);
  out << "t,R,K\n";
  for (int k = 0; k < stats.grid.n_points(); ++k) {
    out << format_double(stats.grid.time(k)) << ',' << format_double(stats.overlap[k]) << ','
        << format_double(stats.autocorr[k]) << '\n';
  }
}

void write_ensemble_csv(const std::string& path, const EnsembleStats& stats) {
  auto out = open_out(path);
  out << "t,mean_R,stderr_R,mean_K,stderr_K\n";
  for (int k = 0; k < stats.grid.n_points(); ++k) {
    out << format_double(stats.grid.time(k)) << ',' << format_double(stats.mean_overlap[k])
        << ',' << format_double(stats.stderr_overlap[k]) << ','
        << format_double(stats.mean_autocorr[k]) << ','
        << format_double(stats.stderr_autocorr[k]) << '\n';
  }
}

void write_compare_csv(const std::string& path, const TimeGrid& grid,
                       const std::vector<double>& r_sim, const std::vector<double>& r_limit,
                       const std::vector<double>& k_sim, const std::vector<double>& k_limit,
                       const std::vector<double>& stderr_r) {
  auto out = open_out(path);
  out << "t,R_sim,R_limit,K_sim,K_limit,abs_err_R,abs_err_K,stderr_R\n";
  for (int k = 0; k < grid.n_points(); ++k) {
    out << format_double(grid.time(k)) << ',' << format_double(r_sim[k]) << ','
        << format_double(r_limit[k]) << ',' << format_double(k_sim[k]) << ','
        << format_double(k_limit[k]) << ',' << format_double(std::abs(r_sim[k] - r_limit[k]))
        << ',' << format_double(std::abs(k_sim[k] - k_limit[k])) << ','
        << format_double(stderr_r[k]) << '\n';
  }
}

void write_phase_csv(const std::string& path, const std::vector<PhasePoint>& points) {
  auto out = open_out(path);
  out << "lambda,beta,sigma_star,rho,lambda_tilde,s_beta,regime,limit_corr\n";
  for (const auto& p : points) {
    out << format_double(p.lambda) << ',' << format_double(p.beta) << ','
        << format_double(p.sigma_star) << ',' << format_double(p.rho) << ','
        << format_double(p.lambda_tilde) << ',' << format_double(p.s_beta) << ','
        << to_string(p.regime) << ',' << format_double(p.limit_corr) << '\n';
  }
}

nlohmann::json measure_to_json(const SpectralMeasure& measure) {
  nlohmann::json j;
  if (measure.is_semicircle()) {
    j["type"] = "semicircle";
    j["sigma_star"] = measure.sigma_star();
  } else {
    j["type"] = "discrete";
    j["atoms"] = measure.atoms();
    j["weights"] = measure.weights();
  }
  return j;
}

nlohmann::json params_to_json(const ModelParams& params) {
  nlohmann::json j;
  j["n"] = params.n;
  j["lambda"] = params.lambda;
  j["rho"] = params.rho;
  if (std::isinf(params.beta)) {
    j["beta"] = "inf";
  } else {
    j["beta"] = params.beta;
  }
  j["measure"] = measure_to_json(params.measure);
  j["confinement"] = params.confinement.name;
  return j;
}

nlohmann::json instance_metadata(const ModelInstance& instance) {
  nlohmann::json j;
  j["seed"] = instance.seed;
  j["params"] = params_to_json(instance.params);
  j["spectrum"] = {
      {"min", instance.d_diag.minCoeff()},
      {"max", instance.d_diag.maxCoeff()},
      {"mean", instance.d_diag.mean()},
      {"n", instance.n()},
  };
  j["has_rotation"] = instance.has_rotation();
  j["has_j"] = instance.has_j();
  return j;
}

void write_json(const std::string& path, const nlohmann::json& value) {
  auto out = open_out(path);
  out << value.dump(2) << '\n';
}

}  // namespace spiked::io
