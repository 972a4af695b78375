#pragma once

#include <cmath>
#include <stdexcept>

namespace chp {

// Hybrid dispatch horizon: electricity clears on a fine step, heat on a
// coarse step, and the coarse step is an exact integer multiple of the fine
// one. Periods are 1-based in the public API, matching the conventions used
// in the file formats and csv exports.
struct TimeGrid {
  double electricity_step_hours = 0.25;
  double heat_step_hours = 1.0;
  int electricity_periods = 0;
  int heat_periods = 0;

  double horizon_hours() const { return heat_step_hours * heat_periods; }

  // electricity periods per heat period
  int block_size() const {
    return static_cast<int>(std::llround(heat_step_hours / electricity_step_hours));
  }

  bool ratio_is_integral() const {
    if (electricity_step_hours <= 0 || heat_step_hours <= 0) return false;
    double ratio = heat_step_hours / electricity_step_hours;
    return std::abs(ratio - std::llround(ratio)) < 1e-9 && std::llround(ratio) >= 1;
  }

  bool horizons_match() const {
    return std::abs(electricity_periods * electricity_step_hours -
                    heat_periods * heat_step_hours) < 1e-9;
  }
};

// Maps electricity period t (1-based) to the heat period it falls inside.
// Monotone nondecreasing and surjective onto 1..heat_periods.
inline int heat_period_of(int t_e, const TimeGrid& grid) {
  if (t_e < 1 || t_e > grid.electricity_periods)
    throw std::out_of_range("electricity period index out of range");
  return (t_e - 1) / grid.block_size() + 1;
}

// 0-based variant used by the internal assemblers.
inline int heat_index_of(int t0, const TimeGrid& grid) { return t0 / grid.block_size(); }

// 0-based electricity periods [first, last] covered by heat period r0.
inline std::pair<int, int> block_range(int r0, const TimeGrid& grid) {
  return {r0 * grid.block_size(), (r0 + 1) * grid.block_size() - 1};
}

}  // namespace chp
