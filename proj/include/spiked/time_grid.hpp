#pragma once

#include <cmath>
#include <cstdlib>

#include "spiked/errors.hpp"

namespace spiked {

/// Uniform grid t_k = k*dt, k = 0..n_steps, with n_steps*dt = t_end.
struct TimeGrid {
  double t_end = 0.0;
  double dt = 0.0;
  int n_steps = 0;

  static TimeGrid make(double t_end, double dt) {
    if (!(dt > 0.0) || !(t_end > 0.0)) {
      throw InvalidParameterError("TimeGrid: t_end and dt must be positive");
    }
    const double steps = std::round(t_end / dt);
    if (steps < 1.0 || steps > 2e9) {
      throw InvalidParameterError("TimeGrid: n_steps out of range");
    }
    TimeGrid grid{t_end, dt, static_cast<int>(steps)};
    if (std::abs(grid.n_steps * dt - t_end) > 1e-12 * std::max(1.0, t_end)) {
      throw InvalidParameterError("TimeGrid: t_end is not an integer multiple of dt");
    }
    return grid;
  }

  double time(int k) const { return k * dt; }
  int n_points() const { return n_steps + 1; }

  bool same_as(const TimeGrid& other) const {
    return n_steps == other.n_steps && dt == other.dt;
  }
};

}  // namespace spiked
