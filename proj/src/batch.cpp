#include "pushplan/batch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <thread>

#include "pushplan/task_io.hpp"

namespace pushplan::cli {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

double wrap_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

Eigen::Vector2d sample_collision_free(std::mt19937_64& rng,
                                      const geometry::RegionDecomposition& decomp,
                                      double half_side) {
  for (int tries = 0; tries < 10000; ++tries) {
    const Eigen::Vector2d p(uniform(rng, -half_side, half_side),
                            uniform(rng, -half_side, half_side));
    try {
      const auto [gap, face] = geometry::min_gap(decomp, p);
      (void)face;
      if (gap >= 0.0) return p;
    } catch (const geometry::NoContainingRegion&) {
      continue;
    }
  }
  throw std::runtime_error("could not sample a collision-free pusher position");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

planner::TaskSpec sample_task(const std::string& preset, uint64_t seed, int num_knots,
                              double timestep) {
  planner::TaskSpec task;
  task.slider = preset_geometry(preset);
  task.num_knots = num_knots;
  task.timestep = timestep;
  const auto decomp = geometry::decompose_regions(task.slider, task.pusher);
  const double hw = task.workspace_side / 2.0;

  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double theta0 = uniform(rng, -M_PI, M_PI);
    const double theta1 = uniform(rng, -M_PI, M_PI);
    // Antipodal rotations make the geodesic cut degenerate; redraw.
    if (std::abs(std::abs(wrap_angle(theta1 - theta0)) - M_PI) < 1e-3) continue;
    task.slider_initial = {uniform(rng, -hw, hw), uniform(rng, -hw, hw), theta0};
    task.slider_target = {uniform(rng, -hw, hw), uniform(rng, -hw, hw), theta1};
    task.pusher_initial = sample_collision_free(rng, decomp, hw);
    task.pusher_target = sample_collision_free(rng, decomp, hw);
    return task;
  }
  throw std::runtime_error("could not sample a nondegenerate task");
}

BatchAggregates BatchReport::compute_aggregates(const std::vector<BatchRow>& rows) {
  BatchAggregates agg;
  if (rows.empty()) return agg;
  std::vector<double> relax, round, gap, t1, t2, t3;
  int successes = 0;
  for (const auto& r : rows) {
    if (!r.success) continue;
    ++successes;
    relax.push_back(r.c_relax);
    round.push_back(r.c_round);
    gap.push_back(r.gap);
    t1.push_back(r.relax_time_s);
    t2.push_back(r.round_time_s);
    t3.push_back(r.refine_time_s);
  }
  agg.success_rate = static_cast<double>(successes) / static_cast<double>(rows.size());
  agg.mean_c_relax = mean_of(relax);
  agg.median_c_relax = median_of(relax);
  agg.mean_c_round = mean_of(round);
  agg.median_c_round = median_of(round);
  agg.mean_gap = mean_of(gap);
  agg.median_gap = median_of(gap);
  agg.mean_relax_time = mean_of(t1);
  agg.median_relax_time = median_of(t1);
  agg.mean_round_time = mean_of(t2);
  agg.median_round_time = median_of(t2);
  agg.mean_refine_time = mean_of(t3);
  agg.median_refine_time = median_of(t3);
  return agg;
}

std::string BatchReport::to_csv() const {
  std::ostringstream os;
  os << "instance,seed,success,c_relax,c_round,gap,relax_time_s,round_time_s,refine_time_s\n";
  for (const auto& r : rows) {
    os << r.instance << "," << r.seed << "," << (r.success ? 1 : 0) << "," << fmt(r.c_relax)
       << "," << fmt(r.c_round) << "," << fmt(r.gap) << "," << fmt(r.relax_time_s) << ","
       << fmt(r.round_time_s) << "," << fmt(r.refine_time_s) << "\n";
  }
  const BatchAggregates& a = aggregates;
  os << "mean,," << fmt(a.success_rate) << "," << fmt(a.mean_c_relax) << ","
     << fmt(a.mean_c_round) << "," << fmt(a.mean_gap) << "," << fmt(a.mean_relax_time) << ","
     << fmt(a.mean_round_time) << "," << fmt(a.mean_refine_time) << "\n";
  os << "median,," << fmt(a.success_rate) << "," << fmt(a.median_c_relax) << ","
     << fmt(a.median_c_round) << "," << fmt(a.median_gap) << "," << fmt(a.median_relax_time)
     << "," << fmt(a.median_round_time) << "," << fmt(a.median_refine_time) << "\n";
  return os.str();
}

BatchReport run_batch(const BatchOptions& options) {
  BatchReport report;
  report.rows.resize(std::max(0, options.count));

  auto run_instance = [&](int i) {
    BatchRow row;
    row.instance = i;
    row.seed = options.seed + static_cast<uint64_t>(i);
    try {
      const planner::TaskSpec task =
          sample_task(options.preset, row.seed, options.num_knots, options.timestep);
      planner::PlannerOptions popt;
      popt.seed = row.seed;
      popt.rounding_attempts = options.rounding_attempts;
      popt.solver_tolerance = options.solver_tolerance;
      const planner::PlanResult res = planner::plan(task, popt);
      row.success = res.residuals.max_equality() <= 1e-6;
      row.c_relax = res.c_relax;
      row.c_round = res.c_round;
      row.gap = res.gap;
      if (!options.zero_timings) {
        row.relax_time_s = res.relax_time_s;
        row.round_time_s = res.round_time_s;
        row.refine_time_s = res.refine_time_s;
      }
    } catch (const std::exception&) {
      row.success = false;
    }
    report.rows[i] = row;
  };

  if (options.jobs <= 1) {
    for (int i = 0; i < options.count; ++i) run_instance(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < options.jobs; ++t) {
      pool.emplace_back([&]() {
        for (int i = next.fetch_add(1); i < options.count; i = next.fetch_add(1))
          run_instance(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  report.aggregates = BatchReport::compute_aggregates(report.rows);
  return report;
}

}  // namespace pushplan::cli
