#pragma once

#include <string>

#include "pushplan/planner.hpp"

namespace pushplan::cli {

// Renders the plan as a horizontal strip of frames: workspace box, slider
// outline, pusher disk, and the contact force arrow, one <g> per knot.
std::string render_plan_svg(const planner::TaskSpec& task,
                            const planner::PlanResult& result);

}  // namespace pushplan::cli
