#pragma once

#include <Eigen/Core>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pushplan/conic_program.hpp"
#include "pushplan/conic_solve.hpp"
#include "pushplan/mode_programs.hpp"

namespace pushplan::sdp {

struct UnsupportedConstraint : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotSolved : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Quadratic form x' Q x over the homogeneous vector x = (1, y). Entries are
// stored upper-triangular (i <= j), each unordered pair once with its total
// coefficient; index 0 is the homogenizing coordinate.
struct HomogeneousQuadratic {
  struct Entry {
    int i = 0, j = 0;
    double v = 0.0;
  };
  std::vector<Entry> entries;
  modes::Sense sense = modes::Sense::kEq;
  std::string label;

  void add(int i, int j, double v);
  double evaluate(const std::vector<double>& y) const;
  std::vector<int> support() const;  // y indices (entry index - 1), 0 excluded
};

// Nonconvex QCQP in homogeneous form: min x'Q0 x  s.t.  x'Q_i x {>=,==} 0,
// A x >= 0, with band groups covering the variables and every quadratic
// constraint supported inside a single group.
struct QcqpProblem {
  int num_vars = 0;
  HomogeneousQuadratic cost;
  std::vector<HomogeneousQuadratic> quadratic_constraints;
  std::vector<conic::AffineRow> affine_rows;  // expr(y) >= 0, constant = column 0
  std::vector<std::vector<int>> band_groups;

  double evaluate_cost(const std::vector<double>& y) const;
  double max_violation(const std::vector<double>& y) const;
};

// Lowers a mode transcription to the homogeneous QCQP: quadratic equalities
// kept, affine equalities split into opposing inequalities, quadratic and
// constant cost atoms folded into Q0. Norm and proximity cost atoms are not
// quadratic and stay with the conic vertex assembly.
QcqpProblem to_qcqp(const modes::ModeTranscription& transcription);

// Block Shor relaxation with shared first/second moments between
// overlapping groups (overlap consistency holds by construction), lifted
// trace rows for the quadratic constraints, the original affine rows, and
// their pairwise RLT products within each group.
//
// Variable space: index 0 is the unit-moment entry X00 (pinned to 1 in a
// standalone solve, scaled by flow in a perspective use), indices 1..n the
// first moments y, then the allocated second moments.
class SemidefiniteRelaxation {
 public:
  static constexpr int kX0 = 0;

  int y_var(int i) const { return 1 + i; }
  int moment_var(int i, int j) const;  // -1 when the pair is in no group
  int num_vars() const { return num_vars_; }
  const std::vector<conic::ConeConstraint>& atoms() const { return atoms_; }
  const conic::AffineRow& cost_row() const { return cost_row_; }
  const QcqpProblem& qcqp() const { return qcqp_; }
  const std::vector<std::vector<int>>& groups() const { return qcqp_.band_groups; }

  // tr(Q X) as an affine row over the relaxation variables.
  conic::AffineRow lift(const HomogeneousQuadratic& q) const;

  // Rank-one lift of a point: fills a full variable-space vector from y.
  std::vector<double> lift_point(const std::vector<double>& y) const;

 private:
  friend SemidefiniteRelaxation relax(const QcqpProblem&);
  QcqpProblem qcqp_;
  int num_vars_ = 0;
  std::map<std::pair<int, int>, int> moments_;
  std::vector<conic::ConeConstraint> atoms_;
  conic::AffineRow cost_row_;
};

SemidefiniteRelaxation relax(const QcqpProblem& qcqp);

struct TighteningContext {
  const modes::ModeTranscription* transcription = nullptr;
  Eigen::Vector2d r_initial = Eigen::Vector2d(1, 0);
  Eigen::Vector2d r_target = Eigen::Vector2d(1, 0);
};

// Adds the dual-frame dynamics rows (world and slider frame, redundant on
// the QCQP but distinct after lifting) and the shortest-geodesic rotation
// cut a . r_k >= b with a = (r_s + r_t)/||r_s + r_t||, skipped when the
// endpoints are antipodal.
SemidefiniteRelaxation add_tightening(const SemidefiniteRelaxation& relaxation,
                                      const TighteningContext& context);

// The cut alone (also applied to non-contact pose variables by the graph
// builder). Returns false when skipped (||r_s + r_t|| < 1e-6).
bool geodesic_cut(const Eigen::Vector2d& r_initial, const Eigen::Vector2d& r_target,
                  Eigen::Vector2d* normal, double* offset);

struct RelaxationSolution {
  conic::SolverOutcome outcome;
  std::vector<double> values;  // relaxation variable space, x0 = 1
};

// Standalone solve with X00 pinned to 1.
RelaxationSolution solve_relaxation(const SemidefiniteRelaxation& relaxation,
                                    const conic::SolveOptions& options = {});

struct ExtractionReport {
  std::vector<double> y;                  // first-column stitch
  std::vector<double> eigenvalue_ratios;  // per block, lambda_2 / lambda_1
  double max_overlap_disagreement = 0.0;  // 0: overlapping moments are shared
};

ExtractionReport extract(const SemidefiniteRelaxation& relaxation,
                         const RelaxationSolution& solution);

}  // namespace pushplan::sdp
