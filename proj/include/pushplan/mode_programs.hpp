#pragma once

#include <Eigen/Core>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pushplan/conic_program.hpp"
#include "pushplan/contact_dynamics.hpp"
#include "pushplan/geometry.hpp"

namespace pushplan::modes {

struct InvalidKnots : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MismatchedLayout : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cost weights of the trajectory objective; defaults follow the reference
// tuning (orders of magnitude chosen so the terms contribute comparably).
struct CostWeights {
  double k_p_pusher = 10.0;    // pusher arc length
  double k_p_slider = 10.0;    // slider arc length (vertex mean)
  double k_v_pusher = 10.0;    // pusher energy
  double k_v_slider = 100.0;   // slider energy (vertex mean)
  double k_force = 10.0;       // contact force regularization
  double k_contact_time = 1.0; // time spent in (and near) contact
  double k_proximity = 0.1;    // proximity length scale in the psi penalty

  void validate() const;  // throws InvalidParams via dynamics on nonpositive
};

enum class ModeKind { kContact, kNonContact };
enum class Sense { kEq, kGe };

struct AffineConstraint {
  conic::AffineRow row;
  Sense sense = Sense::kGe;
  std::string label;
};

struct QuadTerm {
  int i = 0, j = 0;  // i <= j
  double coef = 0.0;
};

// sum coef * y_i * y_j + affine(y)  (== | >=) 0
struct QuadraticConstraint {
  std::vector<QuadTerm> quad;
  conic::AffineRow affine;
  Sense sense = Sense::kEq;
  std::string label;

  void add_quad(int i, int j, double coef);
  double evaluate(const std::vector<double>& y) const;
  void accumulate_gradient(const std::vector<double>& y, double scale,
                           std::vector<double>* grad) const;
  std::vector<int> support() const;
};

enum class CostAtomKind { kNorm, kQuadratic, kProximity, kConstant };

// One convex term of the trajectory cost.
//   kNorm:      weight * || args(y) ||_2
//   kQuadratic: weight * sum_i args_i(y)^2
//   kProximity: weight / (1 + gap(y)/k_phi)        (weight = h k_T)
//   kConstant:  weight
struct CostAtom {
  CostAtomKind kind = CostAtomKind::kConstant;
  double weight = 0.0;
  std::vector<conic::AffineRow> args;
  conic::AffineRow gap;
  double k_phi = 0.0;
  std::string label;

  double evaluate(const std::vector<double>& y) const;
};

// Flat index map for one mode's decision variables.
//
// Contact (face mode, N knots): per knot (p_s x2, r x2, lam_c), then per
// interval (lam_n, lam_f, tau). The pusher position is eliminated:
// p_p = q_i + lam_c t_i + rho n_i, and v_p is the forward difference.
//
// Non-contact (region mode): shared (p_s x2, r x2) since the slider pose is
// constant, then per knot p_p x2, then per interval v_p x2.
struct VariableLayout {
  ModeKind kind = ModeKind::kContact;
  int num_knots = 0;
  int num_vars = 0;

  int p_s(int axis) const;  // non-contact shared pose
  int r(int comp) const;
  int p_s(int knot, int axis) const;
  int r(int knot, int comp) const;
  int lam_c(int knot) const;
  int lam_n(int interval) const;
  int lam_f(int interval) const;
  int tau(int interval) const;
  int p_p(int knot, int axis) const;
  int v_p(int interval, int axis) const;
};

// Box bounds that keep every mode set compact.
struct TranscriptionBounds {
  double workspace_side = 0.6;  // slider position box (world) and pusher box (slider frame)
  double force_max = 10.0;      // bound on lambda_n, N
};

// One mode's discrete transcription: decision variables, affine and
// quadratic constraints, convex cost atoms, band groups of the quadratic
// coupling, and the boundary states used by graph continuity edges.
struct ModeTranscription {
  ModeKind kind = ModeKind::kContact;
  int face = -1;  // contact: face index; non-contact: region index
  int num_knots = 0;
  double timestep = 0.0;
  VariableLayout layout;

  std::vector<AffineConstraint> affine;
  std::vector<QuadraticConstraint> quadratics;
  std::vector<CostAtom> cost;
  std::vector<std::vector<int>> band_groups;

  // 6 rows each: (p_s x2, r x2, p_p x2); row constants carry fixed offsets.
  std::vector<conic::AffineRow> entry_state;
  std::vector<conic::AffineRow> exit_state;

  // Contact frame data kept for torque/audit computations.
  Eigen::Vector2d face_origin = Eigen::Vector2d::Zero();
  Eigen::Vector2d face_normal = Eigen::Vector2d::Zero();
  Eigen::Vector2d face_tangent = Eigen::Vector2d::Zero();
  double face_length = 0.0;
  double pusher_radius = 0.0;
  double c_f = 0.0, c_tau = 0.0;

  // Redundant slider-frame translation dynamics R(r_k)' dp_s = (h/c_f) f_k;
  // used by the relaxation tightening step.
  std::vector<QuadraticConstraint> slider_frame_dynamics_rows() const;
};

ModeTranscription build_contact_mode(int face, const geometry::SliderGeometry& geometry,
                                     const geometry::RegionDecomposition& decomp,
                                     const dynamics::LimitSurfaceModel& model,
                                     double mu_pusher, const CostWeights& weights,
                                     int num_knots, double timestep,
                                     const TranscriptionBounds& bounds);

ModeTranscription build_noncontact_mode(int region, const geometry::SliderGeometry& geometry,
                                        const geometry::RegionDecomposition& decomp,
                                        const CostWeights& weights, int num_knots,
                                        double timestep, const TranscriptionBounds& bounds);

const std::vector<CostAtom>& cost_terms(const ModeTranscription& transcription);

// Numeric objective at a concrete variable assignment.
double evaluate_cost(const ModeTranscription& transcription, const std::vector<double>& y);

double max_affine_violation(const ModeTranscription& transcription,
                            const std::vector<double>& y);
double max_quadratic_violation(const ModeTranscription& transcription,
                               const std::vector<double>& y);

// Knot-level view of a mode segment, for plan output and playback.
struct Knot {
  Eigen::Vector2d p_s = Eigen::Vector2d::Zero();
  Eigen::Vector2d r = Eigen::Vector2d(1, 0);
  Eigen::Vector2d p_p = Eigen::Vector2d::Zero();  // slider frame
  double lam_c = 0.0;                             // contact modes only
};

struct IntervalInput {
  Eigen::Vector2d f = Eigen::Vector2d::Zero();  // slider frame
  double tau = 0.0;
  double lam_n = 0.0, lam_f = 0.0;
  Eigen::Vector2d v_p = Eigen::Vector2d::Zero();
};

struct KnotTrajectory {
  ModeKind kind = ModeKind::kContact;
  int face = -1;
  double timestep = 0.0;
  std::vector<Knot> knots;
  std::vector<IntervalInput> inputs;
};

KnotTrajectory trajectory_from_values(const ModeTranscription& transcription,
                                      const std::vector<double>& y);
std::vector<double> values_from_trajectory(const ModeTranscription& transcription,
                                           const KnotTrajectory& trajectory);

}  // namespace pushplan::modes
