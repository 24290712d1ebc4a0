#include "pushplan/sdp_relaxation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

namespace pushplan::sdp {

using conic::AffineRow;
using conic::ConeConstraint;
using conic::ConeKind;

void HomogeneousQuadratic::add(int i, int j, double v) {
  if (v == 0.0) return;
  if (i > j) std::swap(i, j);
  entries.push_back({i, j, v});
}

double HomogeneousQuadratic::evaluate(const std::vector<double>& y) const {
  auto coord = [&](int i) { return i == 0 ? 1.0 : y[i - 1]; };
  double v = 0.0;
  for (const auto& e : entries) v += e.v * coord(e.i) * coord(e.j);
  return v;
}

std::vector<int> HomogeneousQuadratic::support() const {
  std::set<int> s;
  for (const auto& e : entries) {
    if (e.i > 0) s.insert(e.i - 1);
    if (e.j > 0) s.insert(e.j - 1);
  }
  return {s.begin(), s.end()};
}

double QcqpProblem::evaluate_cost(const std::vector<double>& y) const {
  return cost.evaluate(y);
}

double QcqpProblem::max_violation(const std::vector<double>& y) const {
  double worst = 0.0;
  for (const auto& q : quadratic_constraints) {
    const double v = q.evaluate(y);
    worst = std::max(worst, q.sense == modes::Sense::kEq ? std::abs(v) : std::max(0.0, -v));
  }
  for (const auto& row : affine_rows) worst = std::max(worst, -row.evaluate(y));
  return worst;
}

QcqpProblem to_qcqp(const modes::ModeTranscription& tr) {
  QcqpProblem q;
  q.num_vars = tr.layout.num_vars;
  q.band_groups = tr.band_groups;

  for (const auto& qc : tr.quadratics) {
    HomogeneousQuadratic hq;
    hq.sense = qc.sense;
    hq.label = qc.label;
    for (const auto& t : qc.quad) hq.add(t.i + 1, t.j + 1, t.coef);
    for (const auto& t : qc.affine.terms) hq.add(0, t.var + 1, t.coef);
    if (qc.affine.constant != 0.0) hq.add(0, 0, qc.affine.constant);
    q.quadratic_constraints.push_back(std::move(hq));
  }
  for (const auto& ac : tr.affine) {
    q.affine_rows.push_back(ac.row);
    if (ac.sense == modes::Sense::kEq) {
      AffineRow neg = ac.row;
      neg *= -1.0;
      q.affine_rows.push_back(std::move(neg));
    }
  }
  for (const auto& atom : tr.cost) {
    if (atom.kind == modes::CostAtomKind::kConstant) {
      q.cost.add(0, 0, atom.weight);
    } else if (atom.kind == modes::CostAtomKind::kQuadratic) {
      for (const auto& arg : atom.args) {
        // (sum a_i y_i + b)^2 expanded into homogeneous entries.
        for (size_t p = 0; p < arg.terms.size(); ++p) {
          for (size_t r = p; r < arg.terms.size(); ++r) {
            const double c = arg.terms[p].coef * arg.terms[r].coef * (p == r ? 1.0 : 2.0);
            q.cost.add(arg.terms[p].var + 1, arg.terms[r].var + 1, atom.weight * c);
          }
          if (arg.constant != 0.0)
            q.cost.add(0, arg.terms[p].var + 1,
                       atom.weight * 2.0 * arg.terms[p].coef * arg.constant);
        }
        if (arg.constant != 0.0) q.cost.add(0, 0, atom.weight * arg.constant * arg.constant);
      }
    }
    // kNorm / kProximity atoms are conic, handled at vertex assembly.
  }
  return q;
}

int SemidefiniteRelaxation::moment_var(int i, int j) const {
  if (i > j) std::swap(i, j);
  auto it = moments_.find({i, j});
  return it == moments_.end() ? -1 : it->second;
}

AffineRow SemidefiniteRelaxation::lift(const HomogeneousQuadratic& q) const {
  AffineRow row;
  for (const auto& e : q.entries) {
    if (e.i == 0 && e.j == 0) {
      row.add_term(kX0, e.v);
    } else if (e.i == 0) {
      row.add_term(y_var(e.j - 1), e.v);
    } else {
      const int m = moment_var(e.i - 1, e.j - 1);
      if (m < 0)
        throw UnsupportedConstraint("quadratic term (" + std::to_string(e.i - 1) + "," +
                                    std::to_string(e.j - 1) +
                                    ") spans non-adjacent band groups");
      row.add_term(m, e.v);
    }
  }
  return row;
}

std::vector<double> SemidefiniteRelaxation::lift_point(const std::vector<double>& y) const {
  std::vector<double> z(num_vars_, 0.0);
  z[kX0] = 1.0;
  for (int i = 0; i < qcqp_.num_vars; ++i) z[y_var(i)] = y[i];
  for (const auto& [key, var] : moments_) z[var] = y[key.first] * y[key.second];
  return z;
}

SemidefiniteRelaxation relax(const QcqpProblem& qcqp) {
  SemidefiniteRelaxation rel;
  rel.qcqp_ = qcqp;
  for (auto& g : rel.qcqp_.band_groups) std::sort(g.begin(), g.end());

  std::vector<bool> covered(qcqp.num_vars, false);
  for (const auto& g : rel.qcqp_.band_groups)
    for (int v : g) {
      if (v < 0 || v >= qcqp.num_vars)
        throw UnsupportedConstraint("band group references unknown variable");
      covered[v] = true;
    }
  for (int v = 0; v < qcqp.num_vars; ++v)
    if (!covered[v])
      throw UnsupportedConstraint("band groups must cover every variable");

  // Shared moment allocation: overlapping groups reuse the same entries, so
  // the inter-block consistency equalities hold identically.
  rel.num_vars_ = 1 + qcqp.num_vars;
  for (const auto& g : rel.qcqp_.band_groups) {
    for (size_t j = 0; j < g.size(); ++j)
      for (size_t i = 0; i <= j; ++i) {
        auto key = std::minmax(g[i], g[j]);
        std::pair<int, int> k{key.first, key.second};
        if (!rel.moments_.count(k)) rel.moments_[k] = rel.num_vars_++;
      }
  }

  // One PSD moment block per group: [[x0, y_g'], [y_g, Y_g]].
  for (const auto& g : rel.qcqp_.band_groups) {
    ConeConstraint c;
    c.kind = ConeKind::kPsdTriangle;
    c.psd_side = static_cast<int>(g.size()) + 1;
    c.label = "moment block";
    for (int j = 0; j < c.psd_side; ++j)
      for (int i = 0; i <= j; ++i) {
        AffineRow row;
        if (i == 0 && j == 0)
          row.add_term(SemidefiniteRelaxation::kX0, 1.0);
        else if (i == 0)
          row.add_term(rel.y_var(g[j - 1]), 1.0);
        else
          row.add_term(rel.moment_var(g[i - 1], g[j - 1]), 1.0);
        c.rows.push_back(std::move(row));
      }
    rel.atoms_.push_back(std::move(c));
  }

  // Lifted quadratic constraints, each inside its containing block.
  auto in_some_group = [&](const std::vector<int>& support) {
    for (const auto& g : rel.qcqp_.band_groups) {
      if (std::includes(g.begin(), g.end(), support.begin(), support.end())) return true;
    }
    return false;
  };
  for (const auto& q : qcqp.quadratic_constraints) {
    auto support = q.support();
    if (!in_some_group(support))
      throw UnsupportedConstraint("quadratic constraint '" + q.label +
                                  "' spans non-adjacent band groups");
    ConeConstraint c;
    c.kind = q.sense == modes::Sense::kEq ? ConeKind::kZero : ConeKind::kNonnegative;
    c.label = q.label.empty() ? "lifted quadratic" : q.label;
    c.rows.push_back(rel.lift(q));
    rel.atoms_.push_back(std::move(c));
  }

  // Original affine rows: A X e1 >= 0 over the first column (x0, y).
  {
    ConeConstraint c;
    c.kind = ConeKind::kNonnegative;
    c.label = "affine";
    for (const auto& row : qcqp.affine_rows) {
      AffineRow lifted;
      lifted.add_term(SemidefiniteRelaxation::kX0, row.constant);
      for (const auto& t : row.terms) lifted.add_term(rel.y_var(t.var), t.coef);
      c.rows.push_back(std::move(lifted));
    }
    if (!c.rows.empty()) rel.atoms_.push_back(std::move(c));
  }

  // RLT products A X A' >= 0, restricted to rows supported inside a group
  // and multiplied pairwise within it.
  std::set<std::pair<int, int>> emitted;
  ConeConstraint rlt;
  rlt.kind = ConeKind::kNonnegative;
  rlt.label = "rlt";
  for (const auto& g : rel.qcqp_.band_groups) {
    std::vector<int> rows_in_group;
    for (size_t ri = 0; ri < qcqp.affine_rows.size(); ++ri) {
      bool inside = true;
      for (const auto& t : qcqp.affine_rows[ri].terms)
        if (!std::binary_search(g.begin(), g.end(), t.var)) {
          inside = false;
          break;
        }
      if (inside) rows_in_group.push_back(static_cast<int>(ri));
    }
    for (size_t a = 0; a < rows_in_group.size(); ++a) {
      for (size_t b = a; b < rows_in_group.size(); ++b) {
        const std::pair<int, int> key{rows_in_group[a], rows_in_group[b]};
        if (emitted.count(key)) continue;
        emitted.insert(key);
        const AffineRow& ra = qcqp.affine_rows[key.first];
        const AffineRow& rb = qcqp.affine_rows[key.second];
        HomogeneousQuadratic prod;
        prod.add(0, 0, ra.constant * rb.constant);
        for (const auto& t : rb.terms) prod.add(0, t.var + 1, ra.constant * t.coef);
        for (const auto& t : ra.terms) prod.add(0, t.var + 1, rb.constant * t.coef);
        for (const auto& ta : ra.terms)
          for (const auto& tb : rb.terms) prod.add(ta.var + 1, tb.var + 1, ta.coef * tb.coef);
        rlt.rows.push_back(rel.lift(prod));
      }
    }
  }
  if (!rlt.rows.empty()) rel.atoms_.push_back(std::move(rlt));

  rel.cost_row_ = rel.lift(qcqp.cost);
  return rel;
}

bool geodesic_cut(const Eigen::Vector2d& r_initial, const Eigen::Vector2d& r_target,
                  Eigen::Vector2d* normal, double* offset) {
  const Eigen::Vector2d sum = r_initial + r_target;
  if (sum.norm() < 1e-6) return false;
  *normal = sum.normalized();
  *offset = normal->dot(r_initial);
  return true;
}

SemidefiniteRelaxation add_tightening(const SemidefiniteRelaxation& relaxation,
                                      const TighteningContext& context) {
  if (context.transcription == nullptr)
    throw UnsupportedConstraint("tightening context needs a transcription");
  const auto& tr = *context.transcription;

  QcqpProblem augmented = relaxation.qcqp();
  for (const auto& qc : tr.slider_frame_dynamics_rows()) {
    HomogeneousQuadratic hq;
    hq.sense = qc.sense;
    hq.label = qc.label;
    for (const auto& t : qc.quad) hq.add(t.i + 1, t.j + 1, t.coef);
    for (const auto& t : qc.affine.terms) hq.add(0, t.var + 1, t.coef);
    if (qc.affine.constant != 0.0) hq.add(0, 0, qc.affine.constant);
    augmented.quadratic_constraints.push_back(std::move(hq));
  }

  Eigen::Vector2d a;
  double b = 0.0;
  if (geodesic_cut(context.r_initial, context.r_target, &a, &b)) {
    for (int k = 0; k < tr.num_knots; ++k) {
      AffineRow row;
      row.add_term(tr.layout.r(k, 0), a.x());
      row.add_term(tr.layout.r(k, 1), a.y());
      row.constant = -b;
      augmented.affine_rows.push_back(std::move(row));
    }
  }
  return relax(augmented);
}

RelaxationSolution solve_relaxation(const SemidefiniteRelaxation& relaxation,
                                    const conic::SolveOptions& options) {
  conic::ConicProgram program;
  program.add_variables(relaxation.num_vars());
  for (const auto& atom : relaxation.atoms()) program.add_constraint(atom);
  ConeConstraint pin;
  pin.kind = ConeKind::kZero;
  pin.label = "unit moment";
  AffineRow row;
  row.add_term(SemidefiniteRelaxation::kX0, 1.0);
  row.constant = -1.0;
  pin.rows.push_back(std::move(row));
  program.add_constraint(std::move(pin));
  for (const auto& t : relaxation.cost_row().terms) program.add_objective_term(t.var, t.coef);

  RelaxationSolution sol;
  sol.outcome = conic::solve(program, options);
  if (sol.outcome.optimal()) sol.values = sol.outcome.primal;
  return sol;
}

ExtractionReport extract(const SemidefiniteRelaxation& relaxation,
                         const RelaxationSolution& solution) {
  if (!solution.outcome.optimal() ||
      solution.values.size() != static_cast<size_t>(relaxation.num_vars()))
    throw NotSolved("relaxation has no solution to extract from");

  ExtractionReport report;
  report.y.resize(relaxation.qcqp().num_vars);
  for (int i = 0; i < relaxation.qcqp().num_vars; ++i)
    report.y[i] = solution.values[relaxation.y_var(i)];

  for (const auto& g : relaxation.groups()) {
    const int d = static_cast<int>(g.size()) + 1;
    Eigen::MatrixXd m(d, d);
    m(0, 0) = solution.values[SemidefiniteRelaxation::kX0];
    for (int j = 1; j < d; ++j) {
      m(0, j) = m(j, 0) = solution.values[relaxation.y_var(g[j - 1])];
      for (int i = 1; i <= j; ++i)
        m(i, j) = m(j, i) = solution.values[relaxation.moment_var(g[i - 1], g[j - 1])];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();  // ascending
    const double top = ev(d - 1);
    const double second = d >= 2 ? std::max(0.0, ev(d - 2)) : 0.0;
    report.eigenvalue_ratios.push_back(top <= 0.0 ? 0.0 : second / top);
  }
  report.max_overlap_disagreement = 0.0;
  return report;
}

}  // namespace pushplan::sdp
