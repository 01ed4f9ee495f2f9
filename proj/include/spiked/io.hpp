#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "spiked/asymptotics.hpp"
#include "spiked/chsck.hpp"
#include "spiked/model.hpp"
#include "spiked/sde.hpp"

namespace spiked::io {

/// 17 significant digits: doubles survive a CSV round trip exactly.
std::string format_double(double value);

void write_solution_csv(const std::string& path, const ChsckSolution& solution);
void write_offdiag_csv(const std::string& path, const TimeGrid& grid,
                       const std::vector<int>& steps, const Eigen::MatrixXd& k_offdiag);
void write_trajectory_csv(const std::string& path, const TrajectoryStats& stats);
void write_ensemble_csv(const std::string& path, const EnsembleStats& stats);
void write_compare_csv(const std::string& path, const TimeGrid& grid,
                       const std::vector<double>& r_sim, const std::vector<double>& r_limit,
                       const std::vector<double>& k_sim, const std::vector<double>& k_limit,
                       const std::vector<double>& stderr_r);
void write_phase_csv(const std::string& path, const std::vector<PhasePoint>& points);

nlohmann::json measure_to_json(const SpectralMeasure& measure);
nlohmann::json params_to_json(const ModelParams& params);
/// Seed, params and a spectrum summary; matrices are regenerated from the
/// seed, never serialized.
nlohmann::json instance_metadata(const ModelInstance& instance);

void write_json(const std::string& path, const nlohmann::json& value);

}  // namespace spiked::io
