#pragma once

#include <json.hpp>

#include "spiked/config.hpp"

namespace spiked {

/// Exit-code contract: 0 ok, 2 config error, 3 solver no-convergence,
/// 4 simulation blow-up.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitSimulation = 4;

/// Each command validates its config, writes its data files plus run.json
/// into the output directory, and returns the run.json document.
nlohmann::json cmd_solve(const RunConfig& config);
nlohmann::json cmd_simulate(const RunConfig& config);
nlohmann::json cmd_phase(const RunConfig& config);
nlohmann::json cmd_compare(const RunConfig& config);

/// Dispatches on config.command and maps exceptions to the exit contract,
/// printing the reason to stderr.
int run_command(const RunConfig& config);

}  // namespace spiked
