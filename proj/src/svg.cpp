#include "pushplan/svg.hpp"

#include <cstdio>
#include <sstream>

namespace pushplan::cli {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

Eigen::Vector2d to_world(const modes::Knot& knot, const Eigen::Vector2d& local) {
  return geometry::vertex_world_position(knot.p_s, knot.r, local);
}

}  // namespace

std::string render_plan_svg(const planner::TaskSpec& task,
                            const planner::PlanResult& result) {
  const double side = task.workspace_side;
  const double pad = 0.04;
  const double cell = side + pad;
  const double scale = 300.0;  // px per meter

  int total_knots = 0;
  for (const auto& seg : result.segments) total_knots += static_cast<int>(seg.knots.size());

  std::ostringstream os;
  const double width = cell * std::max(1, total_knots) * scale;
  const double height = cell * scale;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
     << num(height) << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n";

  int frame = 0;
  for (const auto& seg : result.segments) {
    for (size_t k = 0; k < seg.knots.size(); ++k, ++frame) {
      const auto& knot = seg.knots[k];
      const double ox = (frame * cell + pad / 2 + side / 2) * scale;
      const double oy = (pad / 2 + side / 2) * scale;
      os << "  <g id=\"knot-" << frame << "\" transform=\"translate(" << num(ox) << ","
         << num(oy) << ") scale(" << num(scale) << ",-" << num(scale) << ")\">\n";
      os << "    <rect x=\"" << num(-side / 2) << "\" y=\"" << num(-side / 2) << "\" width=\""
         << num(side) << "\" height=\"" << num(side)
         << "\" fill=\"none\" stroke=\"#999\" stroke-width=\"0.003\"/>\n";
      // Slider outline in the world frame.
      os << "    <polygon points=\"";
      for (const auto& v : task.slider.vertices()) {
        const Eigen::Vector2d w = to_world(knot, v);
        os << num(w.x()) << "," << num(w.y()) << " ";
      }
      os << "\" fill=\"#cfe2f3\" stroke=\"#2a6099\" stroke-width=\"0.004\"/>\n";
      // Pusher disk.
      const Eigen::Vector2d pusher = to_world(knot, knot.p_p);
      os << "    <circle cx=\"" << num(pusher.x()) << "\" cy=\"" << num(pusher.y())
         << "\" r=\"" << num(std::max(task.pusher.radius, 0.006))
         << "\" fill=\"#e06666\" stroke=\"none\"/>\n";
      // Contact force arrow at the knot that starts each contact interval.
      if (seg.kind == modes::ModeKind::kContact && k < seg.inputs.size()) {
        const auto& u = seg.inputs[k];
        const Eigen::Vector2d f_world(
            knot.r.x() * u.f.x() - knot.r.y() * u.f.y(),
            knot.r.y() * u.f.x() + knot.r.x() * u.f.y());
        const Eigen::Vector2d tip = pusher + 0.02 * f_world;
        os << "    <line x1=\"" << num(pusher.x()) << "\" y1=\"" << num(pusher.y())
           << "\" x2=\"" << num(tip.x()) << "\" y2=\"" << num(tip.y())
           << "\" stroke=\"#38761d\" stroke-width=\"0.005\"/>\n";
      }
      os << "  </g>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace pushplan::cli
