#include "pushplan/task_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace pushplan::cli {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& path) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!known.count(key))
      throw TaskFileError("unknown key '" + path + key + "'");
  }
}

double require_number(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) throw TaskFileError("missing field '" + path + key + "'");
  if (!obj[key].is_number()) throw TaskFileError("field '" + path + key + "' must be a number");
  return obj[key].get<double>();
}

double optional_number(const json& obj, const std::string& key, double fallback,
                       const std::string& path) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw TaskFileError("field '" + path + key + "' must be a number");
  return obj[key].get<double>();
}

Eigen::Vector2d require_vec2(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) throw TaskFileError("missing field '" + path + key + "'");
  const auto& a = obj[key];
  if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
    throw TaskFileError("field '" + path + key + "' must be [x, y]");
  return {a[0].get<double>(), a[1].get<double>()};
}

Eigen::Vector3d require_pose(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) throw TaskFileError("missing field '" + path + key + "'");
  const auto& a = obj[key];
  if (!a.is_array() || a.size() != 3)
    throw TaskFileError("field '" + path + key + "' must be [x, y, theta]");
  for (const auto& v : a)
    if (!v.is_number()) throw TaskFileError("field '" + path + key + "' must be numeric");
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

}  // namespace

geometry::SliderGeometry preset_geometry(const std::string& name) {
  if (name == "box") return geometry::SliderGeometry::box(0.35, 0.35);
  if (name == "tee") return geometry::SliderGeometry::tee();
  throw TaskFileError("unknown geometry preset '" + name + "' (expected box or tee)");
}

TaskFile parse_task_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw TaskFileError(std::string("task file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw TaskFileError("task file root must be an object");
  reject_unknown_keys(doc,
                      {"schema_version", "geometry", "friction", "weights", "num_knots",
                       "timestep", "workspace", "force_max", "initial", "target", "seed"},
                      "");
  if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer() ||
      doc["schema_version"].get<int>() != 1)
    throw TaskFileError("field 'schema_version' must be the integer 1");

  TaskFile out;
  planner::TaskSpec& task = out.task;

  if (!doc.contains("geometry") || !doc["geometry"].is_object())
    throw TaskFileError("missing object 'geometry'");
  const json& geo = doc["geometry"];
  reject_unknown_keys(geo, {"preset", "vertices", "pusher_radius"}, "geometry.");
  if (geo.contains("preset")) {
    if (geo.contains("vertices"))
      throw TaskFileError("'geometry.preset' and 'geometry.vertices' are exclusive");
    if (!geo["preset"].is_string())
      throw TaskFileError("field 'geometry.preset' must be a string");
    task.slider = preset_geometry(geo["preset"].get<std::string>());
  } else if (geo.contains("vertices")) {
    const auto& verts = geo["vertices"];
    if (!verts.is_array() || verts.size() < 3)
      throw TaskFileError("field 'geometry.vertices' must list at least 3 [x, y] pairs");
    std::vector<Eigen::Vector2d> v;
    for (size_t i = 0; i < verts.size(); ++i) {
      const auto& p = verts[i];
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
        throw TaskFileError("field 'geometry.vertices[" + std::to_string(i) +
                            "]' must be [x, y]");
      v.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    try {
      task.slider = geometry::SliderGeometry::from_vertices(std::move(v));
    } catch (const geometry::DegeneratePolygon& e) {
      throw TaskFileError(std::string("field 'geometry.vertices': ") + e.what());
    }
  } else {
    throw TaskFileError("'geometry' needs either 'preset' or 'vertices'");
  }
  task.pusher.radius = optional_number(geo, "pusher_radius", 0.01, "geometry.");
  if (task.pusher.radius < 0.0)
    throw TaskFileError("field 'geometry.pusher_radius' must be nonnegative");

  if (doc.contains("friction")) {
    const json& fr = doc["friction"];
    if (!fr.is_object()) throw TaskFileError("'friction' must be an object");
    reject_unknown_keys(fr, {"mu_table", "mu_pusher", "c", "mass", "gravity"}, "friction.");
    task.friction.mu_table = optional_number(fr, "mu_table", 0.5, "friction.");
    task.friction.mu_pusher = optional_number(fr, "mu_pusher", 0.05, "friction.");
    task.friction.integration_constant = optional_number(fr, "c", 0.3, "friction.");
    task.friction.mass = optional_number(fr, "mass", 1.0, "friction.");
    task.friction.gravity = optional_number(fr, "gravity", 9.81, "friction.");
  }
  if (doc.contains("weights")) {
    const json& w = doc["weights"];
    if (!w.is_object()) throw TaskFileError("'weights' must be an object");
    reject_unknown_keys(w, {"k_pP", "k_pS", "k_vP", "k_vS", "k_f", "k_T", "k_phi"}, "weights.");
    task.weights.k_p_pusher = optional_number(w, "k_pP", 10.0, "weights.");
    task.weights.k_p_slider = optional_number(w, "k_pS", 10.0, "weights.");
    task.weights.k_v_pusher = optional_number(w, "k_vP", 10.0, "weights.");
    task.weights.k_v_slider = optional_number(w, "k_vS", 100.0, "weights.");
    task.weights.k_force = optional_number(w, "k_f", 10.0, "weights.");
    task.weights.k_contact_time = optional_number(w, "k_T", 1.0, "weights.");
    task.weights.k_proximity = optional_number(w, "k_phi", 0.1, "weights.");
  }
  if (doc.contains("num_knots")) {
    if (!doc["num_knots"].is_number_integer())
      throw TaskFileError("field 'num_knots' must be an integer");
    task.num_knots = doc["num_knots"].get<int>();
  }
  task.timestep = optional_number(doc, "timestep", 0.3, "");
  if (doc.contains("workspace")) {
    const json& ws = doc["workspace"];
    if (!ws.is_object()) throw TaskFileError("'workspace' must be an object");
    reject_unknown_keys(ws, {"side"}, "workspace.");
    task.workspace_side = require_number(ws, "side", "workspace.");
  }
  task.force_max = optional_number(doc, "force_max", 10.0, "");

  for (const char* which : {"initial", "target"}) {
    if (!doc.contains(which) || !doc[which].is_object())
      throw TaskFileError(std::string("missing object '") + which + "'");
    const json& ep = doc[which];
    const std::string path = std::string(which) + ".";
    reject_unknown_keys(ep, {"slider_pose", "pusher_position"}, path);
    const Eigen::Vector3d pose = require_pose(ep, "slider_pose", path);
    const Eigen::Vector2d pp = require_vec2(ep, "pusher_position", path);
    if (std::string(which) == "initial") {
      out.task.slider_initial = pose;
      out.task.pusher_initial = pp;
    } else {
      out.task.slider_target = pose;
      out.task.pusher_target = pp;
    }
  }

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer())
      throw TaskFileError("field 'seed' must be an integer");
    out.seed = doc["seed"].get<uint64_t>();
  }
  return out;
}

TaskFile load_task_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw TaskFileError("cannot open task file '" + path + "'");
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_task_json(buf.str());
}

std::string task_to_json(const planner::TaskSpec& task, uint64_t seed) {
  json geo;
  geo["vertices"] = json::array();
  for (const auto& v : task.slider.vertices()) geo["vertices"].push_back({v.x(), v.y()});
  geo["pusher_radius"] = task.pusher.radius;

  json doc;
  doc["schema_version"] = 1;
  doc["geometry"] = geo;
  doc["friction"] = {{"mu_table", task.friction.mu_table},
                     {"mu_pusher", task.friction.mu_pusher},
                     {"c", task.friction.integration_constant},
                     {"mass", task.friction.mass},
                     {"gravity", task.friction.gravity}};
  doc["weights"] = {{"k_pP", task.weights.k_p_pusher}, {"k_pS", task.weights.k_p_slider},
                    {"k_vP", task.weights.k_v_pusher}, {"k_vS", task.weights.k_v_slider},
                    {"k_f", task.weights.k_force},     {"k_T", task.weights.k_contact_time},
                    {"k_phi", task.weights.k_proximity}};
  doc["num_knots"] = task.num_knots;
  doc["timestep"] = task.timestep;
  doc["workspace"] = {{"side", task.workspace_side}};
  doc["force_max"] = task.force_max;
  doc["initial"] = {
      {"slider_pose",
       {task.slider_initial.x(), task.slider_initial.y(), task.slider_initial.z()}},
      {"pusher_position", {task.pusher_initial.x(), task.pusher_initial.y()}}};
  doc["target"] = {
      {"slider_pose", {task.slider_target.x(), task.slider_target.y(), task.slider_target.z()}},
      {"pusher_position", {task.pusher_target.x(), task.pusher_target.y()}}};
  doc["seed"] = seed;
  return doc.dump(2);
}

std::string plan_to_json(const planner::TaskSpec& task, uint64_t seed,
                         const planner::PlanResult& result, bool zero_timings) {
  json doc;
  doc["schema_version"] = 1;
  doc["seed"] = seed;
  doc["success"] = true;
  doc["mode_sequence"] = result.mode_names;
  doc["costs"] = {{"c_relax", result.c_relax},
                  {"c_round", result.c_round},
                  {"gap", result.gap}};
  doc["residuals"] = {{"so2", result.residuals.so2},
                      {"dynamics", result.residuals.dynamics},
                      {"friction", result.residuals.friction},
                      {"sticking", result.residuals.sticking},
                      {"contact_gap", result.residuals.contact_gap},
                      {"region", result.residuals.region},
                      {"continuity", result.residuals.continuity},
                      {"cut", result.residuals.cut},
                      {"replay", result.replay_error}};
  doc["candidates"] = {{"found", result.candidates_found},
                       {"refined", result.candidates_refined}};
  doc["timings"] = {{"relax_s", zero_timings ? 0.0 : result.relax_time_s},
                    {"round_s", zero_timings ? 0.0 : result.round_time_s},
                    {"refine_s", zero_timings ? 0.0 : result.refine_time_s}};

  doc["segments"] = json::array();
  for (size_t si = 0; si < result.segments.size(); ++si) {
    const auto& seg = result.segments[si];
    json js;
    js["kind"] = seg.kind == modes::ModeKind::kContact ? "contact" : "free";
    js["face"] = seg.face;
    js["timestep"] = seg.timestep;
    js["knots"] = json::array();
    for (const auto& knot : seg.knots) {
      json jk;
      jk["p_s"] = {knot.p_s.x(), knot.p_s.y()};
      jk["r"] = {knot.r.x(), knot.r.y()};
      jk["theta"] = std::atan2(knot.r.y(), knot.r.x());
      jk["p_p"] = {knot.p_p.x(), knot.p_p.y()};
      if (seg.kind == modes::ModeKind::kContact) jk["lam_c"] = knot.lam_c;
      js["knots"].push_back(std::move(jk));
    }
    js["inputs"] = json::array();
    for (size_t k = 0; k < seg.inputs.size(); ++k) {
      const auto& u = seg.inputs[k];
      json ju;
      ju["v_p"] = {u.v_p.x(), u.v_p.y()};
      if (seg.kind == modes::ModeKind::kContact) {
        ju["f"] = {u.f.x(), u.f.y()};
        ju["tau"] = u.tau;
        ju["lam_n"] = u.lam_n;
        ju["lam_f"] = u.lam_f;
        const auto& scaled = result.forces_scaled[si];
        if (k < scaled.size()) {
          ju["f_scaled"] = {scaled[k].f.x(), scaled[k].f.y()};
          ju["tau_scaled"] = scaled[k].tau;
        }
      }
      js["inputs"].push_back(std::move(ju));
    }
    doc["segments"].push_back(std::move(js));
  }
  (void)task;
  return doc.dump(2);
}

}  // namespace pushplan::cli
