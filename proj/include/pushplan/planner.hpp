#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pushplan/contact_dynamics.hpp"
#include "pushplan/gcs.hpp"
#include "pushplan/geometry.hpp"
#include "pushplan/mode_programs.hpp"
#include "pushplan/sdp_relaxation.hpp"

namespace pushplan::planner {

struct UnreachableTarget : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoFeasiblePlan : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RefinementFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidBound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidTask : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TaskSpec {
  geometry::SliderGeometry slider = geometry::SliderGeometry::box(0.35, 0.35);
  geometry::PusherSpec pusher{0.01};
  dynamics::FrictionParams friction;
  modes::CostWeights weights;
  int num_knots = 3;
  double timestep = 0.3;
  double workspace_side = 0.6;
  double force_max = 10.0;
  Eigen::Vector3d slider_initial = Eigen::Vector3d::Zero();  // x, y, theta
  Eigen::Vector3d slider_target = Eigen::Vector3d::Zero();
  Eigen::Vector2d pusher_initial = Eigen::Vector2d::Zero();  // slider frame
  Eigen::Vector2d pusher_target = Eigen::Vector2d::Zero();

  Eigen::Vector2d r_initial() const {
    return {std::cos(slider_initial.z()), std::sin(slider_initial.z())};
  }
  Eigen::Vector2d r_target() const {
    return {std::cos(slider_target.z()), std::sin(slider_target.z())};
  }
};

struct PlannerOptions {
  uint64_t seed = 0;
  int rounding_attempts = 16;
  double solver_tolerance = 1e-8;
  int refine_max_iterations = 200;
  double refine_damping = 1e-3;
  int max_refine_candidates = 6;
  bool verbose = false;
};

enum class VertexKind { kSource, kTarget, kContact, kNonContact };

struct VertexInfo {
  VertexKind kind = VertexKind::kNonContact;
  int face = -1;                  // contact face, or the copy's region
  int pair_a = -2, pair_b = -2;   // subgraph endpoints; faces >= 0, -1 source, -2 target
  int transcription = -1;
};

// Modes-as-vertices graph for one task, plus the per-vertex transcriptions
// used for restriction seeding and refinement.
struct ModeGraph {
  gcs::GcsGraph graph;
  std::vector<VertexInfo> info;
  std::vector<modes::ModeTranscription> transcriptions;  // N_F contact + N_F region
  geometry::RegionDecomposition decomp;
  dynamics::LimitSurfaceModel model;
  bool cut_active = false;
  Eigen::Vector2d cut_normal = Eigen::Vector2d::Zero();
  double cut_offset = 0.0;

  int num_interior_vertices() const;  // contact + contact-pair copies
};

void validate_task(const TaskSpec& task);  // throws InvalidTask

ModeGraph build_mode_graph(const TaskSpec& task);

struct ResidualReport {
  double so2 = 0.0;
  double dynamics = 0.0;      // translation, rotation, torque rows
  double friction = 0.0;
  double sticking = 0.0;
  double contact_gap = 0.0;   // |phi_i| at contact knots
  double region = 0.0;        // non-contact containment
  double continuity = 0.0;
  double cut = 0.0;
  double max_equality() const;  // so2/dynamics/sticking/contact/continuity
  double max_any() const;
};

struct PlanResult {
  std::vector<int> mode_sequence;  // graph vertex ids, source..target
  std::vector<std::string> mode_names;
  std::vector<modes::KnotTrajectory> segments;  // one per interior mode on the path
  double c_relax = 0.0;
  double c_round = 0.0;
  double gap = 0.0;  // (c_round - c_relax) / c_relax
  ResidualReport residuals;
  double replay_error = 0.0;  // forward playback vs planned poses
  // Spatial forces per contact interval, before and after scaling onto the
  // limit surface (empty entries for non-contact segments).
  std::vector<std::vector<dynamics::SpatialForce>> forces;
  std::vector<std::vector<dynamics::SpatialForce>> forces_scaled;
  double relax_time_s = 0.0, round_time_s = 0.0, refine_time_s = 0.0;
  int candidates_found = 0, candidates_refined = 0;
};

PlanResult plan(const TaskSpec& task, const PlannerOptions& options = {});

// (c_round - c_relax) / c_relax; throws InvalidBound when the ordering
// c_relax <= c_round + 1e-6 is violated (a solver or lifting bug).
double certify_gap(double c_relax, double c_round);

// Independent feasibility audit computed from raw trajectory numbers.
ResidualReport audit_plan(const TaskSpec& task, const ModeGraph& mode_graph,
                          const std::vector<modes::KnotTrajectory>& segments);

// Forward playback with the plan-consistent integrator; returns the max
// absolute state deviation from the planned knots.
double replay_plan(const TaskSpec& task, const ModeGraph& mode_graph,
                   const std::vector<modes::KnotTrajectory>& segments);

// --- refinement -------------------------------------------------------------

struct RefinementProblem {
  int num_vars = 0;
  std::vector<modes::AffineConstraint> affine;
  std::vector<modes::QuadraticConstraint> quadratics;  // equalities
  std::vector<modes::CostAtom> cost;
};

struct RefinementOutcome {
  bool converged = false;
  std::vector<double> values;
  double max_quadratic_residual = 0.0;
  double max_affine_violation = 0.0;
  double cost = 0.0;
  int iterations = 0;
};

// Projected Gauss-Newton on the stacked equality residuals, interleaved
// with convex cost steps over the affine-feasible set.
RefinementOutcome nonconvex_refine(const RefinementProblem& problem,
                                   const std::vector<double>& initial,
                                   const PlannerOptions& options);

}  // namespace pushplan::planner
