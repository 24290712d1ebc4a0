#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pushplan::conic {

struct IndexOutOfRange : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ConeKind {
  kZero,                // each row expr == 0
  kNonnegative,         // each row expr >= 0
  kSecondOrder,         // rows (t, w...): t >= ||w||_2
  kRotatedSecondOrder,  // rows (u, v, w...): 2 u v >= ||w||_2^2, u, v >= 0
  kPsdTriangle,         // rows = upper triangle of a symmetric matrix,
                        // column-major: (0,0),(0,1),(1,1),(0,2),...; matrix PSD
};

struct LinearTerm {
  int var = 0;
  double coef = 0.0;
};

// Sparse affine expression  sum_i coef_i * x_{var_i} + constant.
struct AffineRow {
  std::vector<LinearTerm> terms;
  double constant = 0.0;

  AffineRow() = default;
  AffineRow(std::vector<LinearTerm> t, double c) : terms(std::move(t)), constant(c) {}

  void add_term(int var, double coef) {
    if (coef != 0.0) terms.push_back({var, coef});
  }
  double evaluate(const std::vector<double>& x) const;
  AffineRow& operator*=(double s);
};

AffineRow operator-(const AffineRow& a, const AffineRow& b);

struct ConeConstraint {
  ConeKind kind = ConeKind::kZero;
  int psd_side = 0;  // side length d for kPsdTriangle; rows.size() == d(d+1)/2
  std::vector<AffineRow> rows;
  std::string label;  // diagnostics only; not part of program semantics
};

struct ProgramStats {
  int num_variables = 0;
  int num_constraint_rows = 0;  // scalar rows over all cones
  int num_zero_rows = 0;
  int num_nonnegative_rows = 0;
  int num_second_order_cones = 0;
  int num_rotated_cones = 0;
  int num_psd_blocks = 0;
  std::vector<int> psd_block_sides;
};

// Solver-neutral conic program: linear objective, typed cone constraints.
// Constraints keep insertion order so exports are reproducible.
class ConicProgram {
 public:
  int add_variable() { return add_variables(1); }
  int add_variables(int count);

  void add_objective_term(int var, double coef);
  void add_objective_constant(double c) { objective_constant_ += c; }
  void add_constraint(ConeConstraint constraint);

  int num_variables() const { return num_variables_; }
  const std::vector<double>& objective() const { return objective_; }
  double objective_constant() const { return objective_constant_; }
  const std::vector<ConeConstraint>& constraints() const { return constraints_; }

  double evaluate_objective(const std::vector<double>& x) const;
  ProgramStats stats() const;

 private:
  void check_row(const AffineRow& row) const;

  int num_variables_ = 0;
  std::vector<double> objective_;
  double objective_constant_ = 0.0;
  std::vector<ConeConstraint> constraints_;
};

// Worst violation of one constraint at a point (0 when satisfied).
double constraint_violation(const ConeConstraint& c, const std::vector<double>& x);

// Max violation over all constraints.
double max_violation(const ConicProgram& program, const std::vector<double>& x);

}  // namespace pushplan::conic
