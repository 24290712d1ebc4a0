#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "pushplan/batch.hpp"
#include "pushplan/planner.hpp"
#include "pushplan/sdpa_io.hpp"
#include "pushplan/svg.hpp"
#include "pushplan/task_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNoPlan = 2;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw pushplan::cli::TaskFileError("cannot write '" + path + "'");
  os << content;
}

std::string svg_path_for(const std::string& out) {
  std::filesystem::path p(out);
  p.replace_extension(".svg");
  return p.string();
}

int run_plan(const std::string& task_path, std::optional<uint64_t> seed,
             std::optional<int> knots, std::optional<double> timestep, int rounding_attempts,
             double solver_tol, const std::string& out, bool reproducible, bool verbose) {
  pushplan::cli::TaskFile tf = pushplan::cli::load_task_file(task_path);
  if (seed) tf.seed = *seed;
  if (knots) tf.task.num_knots = *knots;
  if (timestep) tf.task.timestep = *timestep;

  pushplan::planner::PlannerOptions options;
  options.seed = tf.seed;
  options.rounding_attempts = rounding_attempts;
  options.solver_tolerance = solver_tol;
  options.verbose = verbose;

  const auto result = pushplan::planner::plan(tf.task, options);
  write_file(out, pushplan::cli::plan_to_json(tf.task, tf.seed, result, reproducible));
  write_file(svg_path_for(out), pushplan::cli::render_plan_svg(tf.task, result));
  std::cerr << "plan: " << result.mode_names.size() << " modes, c_relax=" << result.c_relax
            << " c_round=" << result.c_round << " gap=" << result.gap * 100.0 << "%\n";
  return kExitOk;
}

int run_batch(const pushplan::cli::BatchOptions& options, const std::string& out_csv) {
  const auto report = pushplan::cli::run_batch(options);
  const std::string csv = report.to_csv();
  if (out_csv.empty())
    std::cout << csv;
  else
    write_file(out_csv, csv);
  int successes = 0;
  for (const auto& r : report.rows) successes += r.success ? 1 : 0;
  std::cerr << "batch: " << successes << "/" << report.rows.size() << " succeeded, median gap "
            << report.aggregates.median_gap * 100.0 << "%\n";
  return kExitOk;
}

int run_stats(const std::string& task_path, const std::string& export_sdpa,
              const std::string& dump_graph) {
  pushplan::cli::TaskFile tf = pushplan::cli::load_task_file(task_path);
  const auto mg = pushplan::planner::build_mode_graph(tf.task);
  const auto relaxation = pushplan::gcs::build_relaxation(mg.graph);
  const auto stats = relaxation.program().stats();

  nlohmann::json j;
  j["graph"] = {{"vertices", mg.graph.num_vertices()},
                {"interior_vertices", mg.num_interior_vertices()},
                {"edges", mg.graph.num_edges()}};
  j["constraints"] = stats.num_constraint_rows;
  j["scalar_variables"] = stats.num_variables;
  j["psd_matrices"] = stats.num_psd_blocks;
  nlohmann::json sides = nlohmann::json::object();
  for (int s : stats.psd_block_sides) {
    const std::string key = std::to_string(s);
    sides[key] = (sides.contains(key) ? sides[key].get<int>() : 0) + 1;
  }
  j["psd_block_sides"] = sides;
  j["cones"] = {{"zero_rows", stats.num_zero_rows},
                {"nonnegative_rows", stats.num_nonnegative_rows},
                {"second_order", stats.num_second_order_cones},
                {"rotated", stats.num_rotated_cones}};
  // Published counts for the same task family; block layout here differs by
  // design, so these are context, not a match target.
  j["reference_only"] = {
      {"box_n3", {{"constraints", 48846}, {"scalar_variables", 8854}, {"psd_matrices", 88}}},
      {"tee_n3", {{"constraints", 212795}, {"scalar_variables", 39078}, {"psd_matrices", 368}}},
      {"note", "published reference values; not a match target"}};
  std::cout << j.dump(2) << "\n";

  if (!export_sdpa.empty()) pushplan::conic::write_sdpa_file(relaxation.program(), export_sdpa);
  if (!dump_graph.empty())
    write_file(dump_graph, pushplan::gcs::dump_graph_json(mg.graph, {}));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contact-rich planar pushing planner (GCS + SDP relaxation)"};
  app.require_subcommand(1);

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "Plan one task file");
  std::string task_path, plan_out = "plan.json";
  std::optional<uint64_t> seed_override;
  std::optional<int> knots_override;
  std::optional<double> timestep_override;
  int rounding_attempts = 16;
  double solver_tol = 1e-8;
  bool reproducible = false, verbose = false;
  plan_cmd->add_option("task", task_path, "Task JSON file")->required();
  plan_cmd->add_option("--seed", seed_override, "Override the task seed");
  plan_cmd->add_option("--knots", knots_override, "Override knot points per mode");
  plan_cmd->add_option("--timestep", timestep_override, "Override the timestep [s]");
  plan_cmd->add_option("--rounding-attempts", rounding_attempts, "Rounding attempts");
  plan_cmd->add_option("--solver-tol", solver_tol, "Conic solver tolerance");
  plan_cmd->add_option("--out", plan_out, "Plan JSON output path (SVG next to it)");
  plan_cmd->add_flag("--reproducible", reproducible, "Zero timing fields in outputs");
  plan_cmd->add_flag("--verbose", verbose, "Print solver progress");

  // batch
  auto* batch_cmd = app.add_subcommand("batch", "Random-instance batch with statistics");
  pushplan::cli::BatchOptions batch_options;
  std::string out_csv;
  batch_cmd->add_option("--preset", batch_options.preset, "Geometry preset: box or tee")
      ->check(CLI::IsMember({"box", "tee"}));
  batch_cmd->add_option("--count", batch_options.count, "Number of instances");
  batch_cmd->add_option("--seed", batch_options.seed, "Base seed");
  batch_cmd->add_option("--jobs", batch_options.jobs, "Concurrent instances");
  batch_cmd->add_option("--rounding-attempts", batch_options.rounding_attempts,
                        "Rounding attempts");
  batch_cmd->add_option("--solver-tol", batch_options.solver_tolerance, "Solver tolerance");
  batch_cmd->add_option("--knots", batch_options.num_knots, "Knot points per mode");
  batch_cmd->add_option("--timestep", batch_options.timestep, "Timestep [s]");
  batch_cmd->add_option("--out-csv", out_csv, "CSV output path (stdout when omitted)");
  batch_cmd->add_flag("--reproducible", batch_options.zero_timings,
                      "Zero timing columns in the CSV");

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Assemble the relaxation and report sizes");
  std::string stats_task, export_sdpa, dump_graph;
  stats_cmd->add_option("task", stats_task, "Task JSON file")->required();
  stats_cmd->add_option("--export-sdpa", export_sdpa, "Write the relaxation in SDPA format");
  stats_cmd->add_option("--dump-graph", dump_graph, "Write the mode graph as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (plan_cmd->parsed())
      return run_plan(task_path, seed_override, knots_override, timestep_override,
                      rounding_attempts, solver_tol, plan_out, reproducible, verbose);
    if (batch_cmd->parsed()) return run_batch(batch_options, out_csv);
    if (stats_cmd->parsed()) return run_stats(stats_task, export_sdpa, dump_graph);
  } catch (const pushplan::cli::TaskFileError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const pushplan::planner::InvalidTask& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const pushplan::planner::NoFeasiblePlan& e) {
    std::cerr << "no feasible plan: " << e.what() << "\n";
    return kExitNoPlan;
  } catch (const pushplan::planner::UnreachableTarget& e) {
    std::cerr << "no feasible plan: " << e.what() << "\n";
    return kExitNoPlan;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
