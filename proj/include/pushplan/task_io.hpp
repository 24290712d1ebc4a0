#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "pushplan/planner.hpp"

namespace pushplan::cli {

struct TaskFileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TaskFile {
  planner::TaskSpec task;
  uint64_t seed = 0;
};

// Schema-validated task document ("schema_version": 1); unknown keys are
// rejected with the offending field path in the message.
TaskFile parse_task_json(const std::string& text);
TaskFile load_task_file(const std::string& path);

// Canonical task JSON for a task spec (inverse of parse, defaults spelled
// out), used by the batch harness and tests.
std::string task_to_json(const planner::TaskSpec& task, uint64_t seed);

// Geometry presets used across the CLI: "box" (0.35 m square) and "tee".
geometry::SliderGeometry preset_geometry(const std::string& name);

// Plan JSON document. With zero_timings the timing block reports zeros so
// identical seeds give byte-identical files.
std::string plan_to_json(const planner::TaskSpec& task, uint64_t seed,
                         const planner::PlanResult& result, bool zero_timings);

}  // namespace pushplan::cli
