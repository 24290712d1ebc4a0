#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pushplan/planner.hpp"

namespace pushplan::cli {

struct BatchOptions {
  std::string preset = "box";
  int count = 20;
  uint64_t seed = 0;
  int jobs = 1;
  int rounding_attempts = 16;
  double solver_tolerance = 1e-8;
  int num_knots = 3;
  double timestep = 0.3;
  bool zero_timings = false;
};

struct BatchRow {
  int instance = 0;
  uint64_t seed = 0;
  bool success = false;
  double c_relax = 0.0, c_round = 0.0, gap = 0.0;
  double relax_time_s = 0.0, round_time_s = 0.0, refine_time_s = 0.0;
};

struct BatchAggregates {
  double success_rate = 0.0;
  // Over successful rows.
  double mean_c_relax = 0.0, median_c_relax = 0.0;
  double mean_c_round = 0.0, median_c_round = 0.0;
  double mean_gap = 0.0, median_gap = 0.0;
  double mean_relax_time = 0.0, median_relax_time = 0.0;
  double mean_round_time = 0.0, median_round_time = 0.0;
  double mean_refine_time = 0.0, median_refine_time = 0.0;
};

struct BatchReport {
  std::vector<BatchRow> rows;
  BatchAggregates aggregates;

  static BatchAggregates compute_aggregates(const std::vector<BatchRow>& rows);
  // Fixed header
  // instance,seed,success,c_relax,c_round,gap,relax_time_s,round_time_s,refine_time_s
  // followed by the data rows and mean/median aggregate rows.
  std::string to_csv() const;
};

// Uniform random task in the workspace: slider poses uniform in the box and
// angle, pusher endpoints uniform over the collision-free set by rejection;
// pose pairs within 1e-3 of a half-turn are redrawn (degenerate rotation cut).
planner::TaskSpec sample_task(const std::string& preset, uint64_t seed, int num_knots,
                              double timestep);

BatchReport run_batch(const BatchOptions& options);

}  // namespace pushplan::cli
