#include "pushplan/conic_program.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace pushplan::conic {

double AffineRow::evaluate(const std::vector<double>& x) const {
  double v = constant;
  for (const auto& t : terms) v += t.coef * x[t.var];
  return v;
}

AffineRow& AffineRow::operator*=(double s) {
  for (auto& t : terms) t.coef *= s;
  constant *= s;
  return *this;
}

AffineRow operator-(const AffineRow& a, const AffineRow& b) {
  AffineRow out = a;
  for (const auto& t : b.terms) out.terms.push_back({t.var, -t.coef});
  out.constant -= b.constant;
  return out;
}

int ConicProgram::add_variables(int count) {
  const int first = num_variables_;
  num_variables_ += count;
  objective_.resize(num_variables_, 0.0);
  return first;
}

void ConicProgram::add_objective_term(int var, double coef) {
  if (var < 0 || var >= num_variables_)
    throw IndexOutOfRange("objective term references variable " + std::to_string(var));
  objective_[var] += coef;
}

void ConicProgram::check_row(const AffineRow& row) const {
  for (const auto& t : row.terms) {
    if (t.var < 0 || t.var >= num_variables_)
      throw IndexOutOfRange("constraint references variable " + std::to_string(t.var) +
                            " of " + std::to_string(num_variables_));
  }
}

void ConicProgram::add_constraint(ConeConstraint constraint) {
  for (const auto& row : constraint.rows) check_row(row);
  switch (constraint.kind) {
    case ConeKind::kSecondOrder:
      if (constraint.rows.empty()) throw IndexOutOfRange("empty second-order cone");
      break;
    case ConeKind::kRotatedSecondOrder:
      if (constraint.rows.size() < 2) throw IndexOutOfRange("rotated cone needs >= 2 rows");
      break;
    case ConeKind::kPsdTriangle: {
      const int d = constraint.psd_side;
      if (d <= 0 || static_cast<int>(constraint.rows.size()) != d * (d + 1) / 2)
        throw IndexOutOfRange("PSD triangle row count does not match side");
      break;
    }
    default:
      break;
  }
  constraints_.push_back(std::move(constraint));
}

double ConicProgram::evaluate_objective(const std::vector<double>& x) const {
  double v = objective_constant_;
  for (int i = 0; i < num_variables_; ++i) v += objective_[i] * x[i];
  return v;
}

ProgramStats ConicProgram::stats() const {
  ProgramStats s;
  s.num_variables = num_variables_;
  for (const auto& c : constraints_) {
    s.num_constraint_rows += static_cast<int>(c.rows.size());
    switch (c.kind) {
      case ConeKind::kZero:
        s.num_zero_rows += static_cast<int>(c.rows.size());
        break;
      case ConeKind::kNonnegative:
        s.num_nonnegative_rows += static_cast<int>(c.rows.size());
        break;
      case ConeKind::kSecondOrder:
        ++s.num_second_order_cones;
        break;
      case ConeKind::kRotatedSecondOrder:
        ++s.num_rotated_cones;
        break;
      case ConeKind::kPsdTriangle:
        ++s.num_psd_blocks;
        s.psd_block_sides.push_back(c.psd_side);
        break;
    }
  }
  return s;
}

double constraint_violation(const ConeConstraint& c, const std::vector<double>& x) {
  switch (c.kind) {
    case ConeKind::kZero: {
      double worst = 0.0;
      for (const auto& r : c.rows) worst = std::max(worst, std::abs(r.evaluate(x)));
      return worst;
    }
    case ConeKind::kNonnegative: {
      double worst = 0.0;
      for (const auto& r : c.rows) worst = std::max(worst, -r.evaluate(x));
      return std::max(0.0, worst);
    }
    case ConeKind::kSecondOrder: {
      const double t = c.rows[0].evaluate(x);
      double w2 = 0.0;
      for (size_t i = 1; i < c.rows.size(); ++i) {
        const double v = c.rows[i].evaluate(x);
        w2 += v * v;
      }
      return std::max(0.0, std::sqrt(w2) - t);
    }
    case ConeKind::kRotatedSecondOrder: {
      const double u = c.rows[0].evaluate(x);
      const double v = c.rows[1].evaluate(x);
      double w2 = 0.0;
      for (size_t i = 2; i < c.rows.size(); ++i) {
        const double e = c.rows[i].evaluate(x);
        w2 += e * e;
      }
      return std::max({0.0, -u, -v, w2 - 2.0 * u * v});
    }
    case ConeKind::kPsdTriangle: {
      const int d = c.psd_side;
      Eigen::MatrixXd m(d, d);
      int k = 0;
      for (int j = 0; j < d; ++j)
        for (int i = 0; i <= j; ++i) {
          const double v = c.rows[k++].evaluate(x);
          m(i, j) = v;
          m(j, i) = v;
        }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
      return std::max(0.0, -es.eigenvalues().minCoeff());
    }
  }
  return 0.0;
}

double max_violation(const ConicProgram& program, const std::vector<double>& x) {
  double worst = 0.0;
  for (const auto& c : program.constraints())
    worst = std::max(worst, constraint_violation(c, x));
  return worst;
}

}  // namespace pushplan::conic
