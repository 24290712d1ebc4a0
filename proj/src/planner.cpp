#include "pushplan/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace pushplan::planner {

using conic::AffineRow;
using conic::ConeConstraint;
using conic::ConeKind;
using modes::CostAtom;
using modes::CostAtomKind;
using modes::ModeTranscription;
using modes::Sense;

namespace {

double now_minus(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

gcs::VertexProgram singleton_program(const Eigen::Vector2d& p_s, const Eigen::Vector2d& r,
                                     const Eigen::Vector2d& p_p) {
  gcs::VertexProgram vp;
  vp.num_vars = 0;
  const double state[6] = {p_s.x(), p_s.y(), r.x(), r.y(), p_p.x(), p_p.y()};
  for (double v : state) {
    AffineRow row;
    row.constant = v;
    vp.entry_state.push_back(row);
    vp.exit_state.push_back(row);
  }
  return vp;
}

// Lowers one convex cost atom into homogeneous epigraph form on a vertex
// program (AffineRow constants act as x0 coefficients).
void append_cost_atom(const CostAtom& atom, gcs::VertexProgram* vp) {
  switch (atom.kind) {
    case CostAtomKind::kConstant:
      vp->cost_x0 += atom.weight;
      return;
    case CostAtomKind::kNorm: {
      const int t = vp->num_vars++;
      ConeConstraint c;
      c.kind = ConeKind::kSecondOrder;
      c.label = atom.label;
      c.rows.push_back(AffineRow({{t, 1.0}}, 0.0));
      for (const auto& a : atom.args) c.rows.push_back(a);
      vp->atoms.push_back(std::move(c));
      vp->cost.push_back({t, atom.weight});
      return;
    }
    case CostAtomKind::kQuadratic: {
      // u * x0 >= sum args^2 via the rotated cone (u, x0/2, args).
      const int u = vp->num_vars++;
      ConeConstraint c;
      c.kind = ConeKind::kRotatedSecondOrder;
      c.label = atom.label;
      c.rows.push_back(AffineRow({{u, 1.0}}, 0.0));
      c.rows.push_back(AffineRow({}, 0.5));
      for (const auto& a : atom.args) c.rows.push_back(a);
      vp->atoms.push_back(std::move(c));
      vp->cost.push_back({u, atom.weight});
      return;
    }
    case CostAtomKind::kProximity: {
      // t (x0 + gap/k_phi) >= weight x0^2 via (t, v, sqrt(2 weight) x0).
      const int t = vp->num_vars++;
      ConeConstraint c;
      c.kind = ConeKind::kRotatedSecondOrder;
      c.label = atom.label;
      c.rows.push_back(AffineRow({{t, 1.0}}, 0.0));
      AffineRow v;
      for (const auto& term : atom.gap.terms) v.add_term(term.var, term.coef / atom.k_phi);
      v.constant = 1.0 + atom.gap.constant / atom.k_phi;
      c.rows.push_back(std::move(v));
      c.rows.push_back(AffineRow({}, std::sqrt(2.0 * atom.weight)));
      vp->atoms.push_back(std::move(c));
      vp->cost.push_back({t, 1.0});
      return;
    }
  }
}

gcs::VertexProgram contact_vertex_program(const sdp::SemidefiniteRelaxation& rel,
                                          const ModeTranscription& tr) {
  gcs::VertexProgram vp;
  vp.num_vars = rel.num_vars() - 1;  // x0 becomes the implicit scaling slot

  auto remap = [](const AffineRow& row) {
    AffineRow out;
    for (const auto& t : row.terms) {
      if (t.var == sdp::SemidefiniteRelaxation::kX0)
        out.constant += t.coef;
      else
        out.add_term(t.var - 1, t.coef);
    }
    out.constant += row.constant;
    return out;
  };

  for (const auto& atom : rel.atoms()) {
    ConeConstraint c;
    c.kind = atom.kind;
    c.psd_side = atom.psd_side;
    c.label = atom.label;
    c.rows.reserve(atom.rows.size());
    for (const auto& row : atom.rows) c.rows.push_back(remap(row));
    vp.atoms.push_back(std::move(c));
  }
  for (const auto& t : rel.cost_row().terms) {
    if (t.var == sdp::SemidefiniteRelaxation::kX0)
      vp.cost_x0 += t.coef;
    else
      vp.cost.push_back({t.var - 1, t.coef});
  }
  // Arc-length atoms are conic and skipped by the QCQP lowering; transcription
  // variable i coincides with relaxation first-moment slot i.
  for (const auto& atom : tr.cost)
    if (atom.kind == CostAtomKind::kNorm) append_cost_atom(atom, &vp);

  vp.entry_state = tr.entry_state;
  vp.exit_state = tr.exit_state;
  return vp;
}

gcs::VertexProgram noncontact_vertex_program(const ModeTranscription& tr, bool cut_active,
                                             const Eigen::Vector2d& cut_normal,
                                             double cut_offset) {
  gcs::VertexProgram vp;
  vp.num_vars = tr.layout.num_vars;

  ConeConstraint eqs, ineqs;
  eqs.kind = ConeKind::kZero;
  eqs.label = "affine equalities";
  ineqs.kind = ConeKind::kNonnegative;
  ineqs.label = "affine inequalities";
  for (const auto& c : tr.affine)
    (c.sense == Sense::kEq ? eqs : ineqs).rows.push_back(c.row);
  if (cut_active) {
    AffineRow row;
    row.add_term(tr.layout.r(0), cut_normal.x());
    row.add_term(tr.layout.r(1), cut_normal.y());
    row.constant = -cut_offset;
    ineqs.rows.push_back(std::move(row));
  }
  if (!eqs.rows.empty()) vp.atoms.push_back(std::move(eqs));
  if (!ineqs.rows.empty()) vp.atoms.push_back(std::move(ineqs));

  for (const auto& atom : tr.cost) append_cost_atom(atom, &vp);
  vp.entry_state = tr.entry_state;
  vp.exit_state = tr.exit_state;
  return vp;
}

bool pusher_on_face(const geometry::RegionDecomposition& decomp, int face,
                    const Eigen::Vector2d& p, double* lam_c) {
  const auto& f = decomp.faces().at(face);
  const double phi = decomp.gap(face, p);
  if (std::abs(phi) > 1e-9) return false;
  const Eigen::Vector2d contact = p - decomp.pusher_radius() * f.outward_normal;
  const double lam = f.tangent.dot(contact - f.q_start);
  if (lam < -1e-9 || lam > f.length + 1e-9) return false;
  if (lam_c != nullptr) *lam_c = std::clamp(lam, 0.0, f.length);
  return true;
}

}  // namespace

void validate_task(const TaskSpec& task) {
  task.friction.validate();
  task.weights.validate();
  if (task.num_knots < 2) throw InvalidTask("task needs at least 2 knot points");
  if (!(task.timestep > 0.0)) throw InvalidTask("timestep must be positive");
  if (!(task.workspace_side > 0.0)) throw InvalidTask("workspace side must be positive");
  if (!(task.force_max > 0.0)) throw InvalidTask("force bound must be positive");
  const double hw = task.workspace_side / 2.0;
  for (const auto* pose : {&task.slider_initial, &task.slider_target}) {
    if (std::abs(pose->x()) > hw || std::abs(pose->y()) > hw)
      throw InvalidTask("slider pose lies outside the workspace box");
  }
  const auto decomp = decompose_regions(task.slider, task.pusher);
  for (const auto* p : {&task.pusher_initial, &task.pusher_target}) {
    if (std::abs(p->x()) > hw || std::abs(p->y()) > hw)
      throw InvalidTask("pusher position lies outside the workspace box");
    try {
      const auto [gap, face] = geometry::min_gap(decomp, *p);
      (void)face;
      if (gap < -1e-9) throw InvalidTask("pusher position penetrates the slider");
    } catch (const geometry::NoContainingRegion&) {
      throw InvalidTask("pusher position lies inside the slider body");
    }
  }
}

int ModeGraph::num_interior_vertices() const {
  int count = 0;
  for (const auto& vi : info) {
    if (vi.kind == VertexKind::kContact) ++count;
    if (vi.kind == VertexKind::kNonContact && vi.pair_a >= 0 && vi.pair_b >= 0) ++count;
  }
  return count;
}

ModeGraph build_mode_graph(const TaskSpec& task) {
  validate_task(task);

  ModeGraph mg{.graph = {},
               .info = {},
               .transcriptions = {},
               .decomp = decompose_regions(task.slider, task.pusher),
               .model = limit_surface(task.friction, task.slider.characteristic_radius())};
  const int nf = task.slider.num_faces();
  const modes::TranscriptionBounds bounds{task.workspace_side, task.force_max};
  const Eigen::Vector2d r_init = task.r_initial();
  const Eigen::Vector2d r_goal = task.r_target();
  mg.cut_active = sdp::geodesic_cut(r_init, r_goal, &mg.cut_normal, &mg.cut_offset);

  // Per-face contact programs (relaxed + tightened) and per-region
  // non-contact programs.
  std::vector<gcs::VertexProgram> contact_programs(nf), region_programs(nf);
  mg.transcriptions.reserve(2 * nf);
  for (int i = 0; i < nf; ++i) {
    ModeTranscription tr =
        build_contact_mode(i, task.slider, mg.decomp, mg.model, task.friction.mu_pusher,
                           task.weights, task.num_knots, task.timestep, bounds);
    sdp::SemidefiniteRelaxation rel = sdp::relax(sdp::to_qcqp(tr));
    rel = sdp::add_tightening(rel, {&tr, r_init, r_goal});
    contact_programs[i] = contact_vertex_program(rel, tr);
    mg.transcriptions.push_back(std::move(tr));
  }
  for (int k = 0; k < nf; ++k) {
    ModeTranscription tr = build_noncontact_mode(k, task.slider, mg.decomp, task.weights,
                                                 task.num_knots, task.timestep, bounds);
    region_programs[k] =
        noncontact_vertex_program(tr, mg.cut_active, mg.cut_normal, mg.cut_offset);
    mg.transcriptions.push_back(std::move(tr));
  }

  const Eigen::Vector2d p_s_init = task.slider_initial.head<2>();
  const Eigen::Vector2d p_s_goal = task.slider_target.head<2>();
  const int source =
      mg.graph.add_vertex({"source", singleton_program(p_s_init, r_init, task.pusher_initial)});
  mg.info.push_back({VertexKind::kSource, -1, -2, -2, -1});
  const int target =
      mg.graph.add_vertex({"target", singleton_program(p_s_goal, r_goal, task.pusher_target)});
  mg.info.push_back({VertexKind::kTarget, -1, -2, -2, -1});
  mg.graph.set_source(source);
  mg.graph.set_target(target);

  std::vector<int> contact_vertex(nf);
  for (int i = 0; i < nf; ++i) {
    contact_vertex[i] = mg.graph.add_vertex({"contact_" + std::to_string(i), contact_programs[i]});
    mg.info.push_back({VertexKind::kContact, i, -2, -2, i});
  }

  // Region adjacency and endpoint membership, precomputed once.
  std::vector<std::vector<bool>> intersects(nf, std::vector<bool>(nf, false));
  for (int k = 0; k < nf; ++k)
    for (int l = k + 1; l < nf; ++l)
      intersects[k][l] = intersects[l][k] =
          geometry::regions_intersect(mg.decomp, k, l, task.workspace_side);
  std::vector<bool> holds_init(nf), holds_goal(nf);
  for (int k = 0; k < nf; ++k) {
    holds_init[k] = mg.decomp.region_contains(k, task.pusher_initial);
    holds_goal[k] = mg.decomp.region_contains(k, task.pusher_target);
  }

  // One copy of every non-contact mode per endpoint pair; the source and
  // target take part exactly like extra contact endpoints.
  constexpr int kSourceTag = -1, kTargetTag = -2;
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < nf; ++i)
    for (int j = i + 1; j < nf; ++j) pairs.push_back({i, j});
  for (int i = 0; i < nf; ++i) pairs.push_back({kSourceTag, i});
  for (int i = 0; i < nf; ++i) pairs.push_back({kTargetTag, i});
  pairs.push_back({kSourceTag, kTargetTag});

  for (const auto& [a, b] : pairs) {
    auto tag_name = [](int t) {
      if (t == kSourceTag) return std::string("s");
      if (t == kTargetTag) return std::string("t");
      return std::to_string(t);
    };
    std::vector<int> copies(nf);
    for (int k = 0; k < nf; ++k) {
      copies[k] = mg.graph.add_vertex(
          {"free_" + std::to_string(k) + "_pair_" + tag_name(a) + "_" + tag_name(b),
           region_programs[k]});
      mg.info.push_back({VertexKind::kNonContact, k, a, b, nf + k});
    }
    for (int k = 0; k < nf; ++k)
      for (int l = k + 1; l < nf; ++l)
        if (intersects[k][l]) {
          mg.graph.add_edge(copies[k], copies[l]);
          mg.graph.add_edge(copies[l], copies[k]);
        }
    for (int tag : {a, b}) {
      if (tag >= 0) {
        mg.graph.add_edge(contact_vertex[tag], copies[tag]);
        mg.graph.add_edge(copies[tag], contact_vertex[tag]);
      } else if (tag == kSourceTag) {
        for (int k = 0; k < nf; ++k)
          if (holds_init[k]) mg.graph.add_edge(source, copies[k]);
      } else {
        for (int k = 0; k < nf; ++k)
          if (holds_goal[k]) mg.graph.add_edge(copies[k], target);
      }
    }
  }

  // A task that starts or ends in contact links straight into that face.
  for (int i = 0; i < nf; ++i) {
    if (pusher_on_face(mg.decomp, i, task.pusher_initial, nullptr))
      mg.graph.add_edge(source, contact_vertex[i]);
    if (pusher_on_face(mg.decomp, i, task.pusher_target, nullptr))
      mg.graph.add_edge(contact_vertex[i], target);
  }

  if (!mg.graph.source_connects_to_target())
    throw UnreachableTarget("no mode sequence connects the task endpoints");
  return mg;
}

double certify_gap(double c_relax, double c_round) {
  if (c_round < c_relax - 1e-6)
    throw InvalidBound("rounded cost " + std::to_string(c_round) +
                       " undercuts the relaxation bound " + std::to_string(c_relax));
  return (c_round - c_relax) / c_relax;
}

// --- refinement --------------------------------------------------------------

namespace {

// Standalone (x0 = 1) lowering of cost atoms into a conic program over an
// existing variable block.
void lower_cost_standalone(const std::vector<CostAtom>& atoms, conic::ConicProgram* p) {
  for (const auto& atom : atoms) {
    switch (atom.kind) {
      case CostAtomKind::kConstant:
        p->add_objective_constant(atom.weight);
        break;
      case CostAtomKind::kNorm: {
        const int t = p->add_variable();
        ConeConstraint c;
        c.kind = ConeKind::kSecondOrder;
        c.rows.push_back(AffineRow({{t, 1.0}}, 0.0));
        for (const auto& a : atom.args) c.rows.push_back(a);
        p->add_constraint(std::move(c));
        p->add_objective_term(t, atom.weight);
        break;
      }
      case CostAtomKind::kQuadratic: {
        const int u = p->add_variable();
        ConeConstraint c;
        c.kind = ConeKind::kRotatedSecondOrder;
        c.rows.push_back(AffineRow({{u, 1.0}}, 0.0));
        c.rows.push_back(AffineRow({}, 0.5));
        for (const auto& a : atom.args) c.rows.push_back(a);
        p->add_constraint(std::move(c));
        p->add_objective_term(u, atom.weight);
        break;
      }
      case CostAtomKind::kProximity: {
        const int t = p->add_variable();
        ConeConstraint c;
        c.kind = ConeKind::kRotatedSecondOrder;
        c.rows.push_back(AffineRow({{t, 1.0}}, 0.0));
        AffineRow v;
        for (const auto& term : atom.gap.terms) v.add_term(term.var, term.coef / atom.k_phi);
        v.constant = 1.0 + atom.gap.constant / atom.k_phi;
        c.rows.push_back(std::move(v));
        c.rows.push_back(AffineRow({}, std::sqrt(2.0 * atom.weight)));
        p->add_constraint(std::move(c));
        p->add_objective_term(t, 1.0);
        break;
      }
    }
  }
}

double evaluate_refinement_cost(const RefinementProblem& problem,
                                const std::vector<double>& w) {
  double total = 0.0;
  for (const auto& atom : problem.cost) total += atom.evaluate(w);
  return total;
}

double max_quad_residual(const RefinementProblem& problem, const std::vector<double>& w) {
  double worst = 0.0;
  for (const auto& q : problem.quadratics) worst = std::max(worst, std::abs(q.evaluate(w)));
  return worst;
}

double max_affine_viol(const RefinementProblem& problem, const std::vector<double>& w) {
  double worst = 0.0;
  for (const auto& c : problem.affine) {
    const double v = c.row.evaluate(w);
    worst = std::max(worst, c.sense == Sense::kEq ? std::abs(v) : std::max(0.0, -v));
  }
  return worst;
}

// One damped Gauss-Newton projection step onto the quadratic equalities,
// staying affine-feasible. Returns false on subproblem failure.
bool gauss_newton_step(const RefinementProblem& problem, std::vector<double>* w,
                       double damping, const conic::SolveOptions& opts) {
  const int n = problem.num_vars;
  conic::ConicProgram p;
  const int delta = p.add_variables(n);
  const int u = p.add_variable();

  ConeConstraint gn;
  gn.kind = ConeKind::kRotatedSecondOrder;
  gn.rows.push_back(AffineRow({{u, 1.0}}, 0.0));
  gn.rows.push_back(AffineRow({}, 0.5));
  std::vector<double> grad(n);
  for (const auto& q : problem.quadratics) {
    std::fill(grad.begin(), grad.end(), 0.0);
    q.accumulate_gradient(*w, 1.0, &grad);
    AffineRow row;
    for (int j = 0; j < n; ++j) row.add_term(delta + j, grad[j]);
    row.constant = q.evaluate(*w);
    gn.rows.push_back(std::move(row));
  }
  const double sd = std::sqrt(damping);
  for (int j = 0; j < n; ++j) gn.rows.push_back(AffineRow({{delta + j, sd}}, 0.0));
  p.add_constraint(std::move(gn));
  p.add_objective_term(u, 1.0);

  ConeConstraint eqs, ineqs;
  eqs.kind = ConeKind::kZero;
  ineqs.kind = ConeKind::kNonnegative;
  for (const auto& c : problem.affine) {
    AffineRow row;
    for (const auto& t : c.row.terms) row.add_term(delta + t.var, t.coef);
    row.constant = c.row.evaluate(*w);
    (c.sense == Sense::kEq ? eqs : ineqs).rows.push_back(std::move(row));
  }
  if (!eqs.rows.empty()) p.add_constraint(std::move(eqs));
  if (!ineqs.rows.empty()) p.add_constraint(std::move(ineqs));

  const auto outcome = conic::solve(p, opts);
  if (!outcome.optimal()) return false;
  for (int j = 0; j < n; ++j) (*w)[j] += outcome.primal[delta + j];
  return true;
}

// Convex cost step over the affine set with the quadratic equalities
// linearized at w, inside an infinity-norm trust region.
bool cost_step(const RefinementProblem& problem, const std::vector<double>& w, double trust,
               const conic::SolveOptions& opts, std::vector<double>* out) {
  const int n = problem.num_vars;
  conic::ConicProgram p;
  const int x = p.add_variables(n);

  ConeConstraint eqs, ineqs;
  eqs.kind = ConeKind::kZero;
  ineqs.kind = ConeKind::kNonnegative;
  for (const auto& c : problem.affine) {
    AffineRow row = c.row;
    for (auto& t : row.terms) t.var += x;
    (c.sense == Sense::kEq ? eqs : ineqs).rows.push_back(std::move(row));
  }
  std::vector<double> grad(n);
  for (const auto& q : problem.quadratics) {
    std::fill(grad.begin(), grad.end(), 0.0);
    q.accumulate_gradient(w, 1.0, &grad);
    AffineRow row;
    double c0 = q.evaluate(w);
    for (int j = 0; j < n; ++j) {
      row.add_term(x + j, grad[j]);
      c0 -= grad[j] * w[j];
    }
    row.constant = c0;
    eqs.rows.push_back(std::move(row));
  }
  for (int j = 0; j < n; ++j) {
    ineqs.rows.push_back(AffineRow({{x + j, 1.0}}, trust - w[j]));
    ineqs.rows.push_back(AffineRow({{x + j, -1.0}}, trust + w[j]));
  }
  if (!eqs.rows.empty()) p.add_constraint(std::move(eqs));
  if (!ineqs.rows.empty()) p.add_constraint(std::move(ineqs));
  lower_cost_standalone(problem.cost, &p);

  const auto outcome = conic::solve(p, opts);
  if (!outcome.optimal()) return false;
  out->assign(outcome.primal.begin(), outcome.primal.begin() + n);
  return true;
}

}  // namespace

RefinementOutcome nonconvex_refine(const RefinementProblem& problem,
                                   const std::vector<double>& initial,
                                   const PlannerOptions& options) {
  constexpr double kQuadTol = 1e-6;
  constexpr double kAffineTol = 1e-8;
  const conic::SolveOptions solve_opts{.tolerance = 1e-9, .max_iterations = 200};

  RefinementOutcome out;
  std::vector<double> w = initial;
  int iterations = 0;

  auto project = [&](std::vector<double>* wp) {
    for (int inner = 0; inner < 25 && iterations < options.refine_max_iterations; ++inner) {
      if (max_quad_residual(problem, *wp) <= 0.2 * kQuadTol &&
          max_affine_viol(problem, *wp) <= 0.2 * kAffineTol)
        return true;
      ++iterations;
      if (!gauss_newton_step(problem, wp, options.refine_damping, solve_opts)) return false;
    }
    return max_quad_residual(problem, *wp) <= kQuadTol &&
           max_affine_viol(problem, *wp) <= kAffineTol;
  };

  // Feasibility first (a guess that is already feasible short-circuits).
  if (max_quad_residual(problem, w) > kQuadTol || max_affine_viol(problem, w) > kAffineTol) {
    if (!project(&w)) {
      out.values = std::move(w);
      out.max_quadratic_residual = max_quad_residual(problem, out.values);
      out.max_affine_violation = max_affine_viol(problem, out.values);
      out.iterations = iterations;
      return out;
    }
  }

  // Cost polish: convex steps on the linearized manifold, reprojected.
  double trust = 0.05;
  double best_cost = evaluate_refinement_cost(problem, w);
  while (iterations < options.refine_max_iterations && trust > 1e-7) {
    ++iterations;
    std::vector<double> trial;
    if (!cost_step(problem, w, trust, solve_opts, &trial)) {
      trust *= 0.5;
      continue;
    }
    if (!project(&trial)) {
      trust *= 0.5;
      continue;
    }
    const double trial_cost = evaluate_refinement_cost(problem, trial);
    if (trial_cost < best_cost - 1e-10) {
      const double gain = best_cost - trial_cost;
      w = std::move(trial);
      best_cost = trial_cost;
      trust = std::min(trust * 1.6, 0.5);
      if (gain < 1e-8) break;
    } else {
      trust *= 0.5;
    }
  }

  out.converged = max_quad_residual(problem, w) <= kQuadTol &&
                  max_affine_viol(problem, w) <= kAffineTol;
  out.max_quadratic_residual = max_quad_residual(problem, w);
  out.max_affine_violation = max_affine_viol(problem, w);
  out.cost = evaluate_refinement_cost(problem, w);
  out.values = std::move(w);
  out.iterations = iterations;
  return out;
}

// --- plan pipeline -----------------------------------------------------------

namespace {

struct PathModes {
  std::vector<int> vertices;  // interior vertices, in path order
  std::vector<const ModeTranscription*> transcriptions;
  std::vector<int> offsets;
  int num_vars = 0;
};

PathModes collect_path_modes(const ModeGraph& mg, const gcs::PathCandidate& path) {
  PathModes pm;
  for (int v : path.vertices) {
    const VertexInfo& vi = mg.info[v];
    if (vi.kind == VertexKind::kSource || vi.kind == VertexKind::kTarget) continue;
    pm.vertices.push_back(v);
    pm.transcriptions.push_back(&mg.transcriptions[vi.transcription]);
    pm.offsets.push_back(pm.num_vars);
    pm.num_vars += mg.transcriptions[vi.transcription].layout.num_vars;
  }
  return pm;
}

AffineRow shift_row(const AffineRow& row, int offset) {
  AffineRow out = row;
  for (auto& t : out.terms) t.var += offset;
  return out;
}

RefinementProblem build_refinement_problem(const TaskSpec& task, const ModeGraph& mg,
                                           const PathModes& pm) {
  RefinementProblem rp;
  rp.num_vars = pm.num_vars;
  for (size_t m = 0; m < pm.vertices.size(); ++m) {
    const ModeTranscription& tr = *pm.transcriptions[m];
    const int off = pm.offsets[m];
    for (const auto& c : tr.affine) rp.affine.push_back({shift_row(c.row, off), c.sense, c.label});
    for (const auto& q : tr.quadratics) {
      modes::QuadraticConstraint qc = q;
      for (auto& t : qc.quad) {
        t.i += off;
        t.j += off;
      }
      qc.affine = shift_row(qc.affine, off);
      rp.quadratics.push_back(std::move(qc));
    }
    for (const auto& atom : tr.cost) {
      CostAtom a = atom;
      for (auto& arg : a.args) arg = shift_row(arg, off);
      a.gap = shift_row(a.gap, off);
      rp.cost.push_back(std::move(a));
    }
    if (mg.cut_active) {
      const int knots = tr.kind == modes::ModeKind::kContact ? tr.num_knots : 1;
      for (int k = 0; k < knots; ++k) {
        AffineRow row;
        row.add_term(off + tr.layout.r(k, 0), mg.cut_normal.x());
        row.add_term(off + tr.layout.r(k, 1), mg.cut_normal.y());
        row.constant = -mg.cut_offset;
        rp.affine.push_back({std::move(row), Sense::kGe, "geodesic cut"});
      }
    }
  }

  // Continuity along the path plus the task boundary conditions.
  auto add_state_equalities = [&](const std::vector<AffineRow>& lhs, int lhs_off,
                                  const std::vector<AffineRow>& rhs, int rhs_off) {
    for (size_t r = 0; r < lhs.size(); ++r) {
      AffineRow row = shift_row(lhs[r], lhs_off) - shift_row(rhs[r], rhs_off);
      rp.affine.push_back({std::move(row), Sense::kEq, "continuity"});
    }
  };
  for (size_t m = 0; m + 1 < pm.vertices.size(); ++m)
    add_state_equalities(pm.transcriptions[m]->exit_state, pm.offsets[m],
                         pm.transcriptions[m + 1]->entry_state, pm.offsets[m + 1]);

  const Eigen::Vector2d r_init = task.r_initial(), r_goal = task.r_target();
  const double source_state[6] = {task.slider_initial.x(), task.slider_initial.y(),
                                  r_init.x(),              r_init.y(),
                                  task.pusher_initial.x(), task.pusher_initial.y()};
  const double target_state[6] = {task.slider_target.x(), task.slider_target.y(),
                                  r_goal.x(),             r_goal.y(),
                                  task.pusher_target.x(), task.pusher_target.y()};
  if (!pm.vertices.empty()) {
    const auto& first = *pm.transcriptions.front();
    for (int r = 0; r < 6; ++r) {
      AffineRow row = shift_row(first.entry_state[r], pm.offsets.front());
      row.constant -= source_state[r];
      rp.affine.push_back({std::move(row), Sense::kEq, "source boundary"});
    }
    const auto& last = *pm.transcriptions.back();
    for (int r = 0; r < 6; ++r) {
      AffineRow row = shift_row(last.exit_state[r], pm.offsets.back());
      row.constant -= target_state[r];
      rp.affine.push_back({std::move(row), Sense::kEq, "target boundary"});
    }
  }
  return rp;
}

}  // namespace

ResidualReport audit_plan(const TaskSpec& task, const ModeGraph& mg,
                          const std::vector<modes::KnotTrajectory>& segments) {
  ResidualReport rep;
  const auto& model = mg.model;
  const double h = task.timestep;
  const double rho = task.pusher.radius;

  auto track = [](double* slot, double v) { *slot = std::max(*slot, v); };

  for (const auto& seg : segments) {
    for (const auto& knot : seg.knots) {
      track(&rep.so2, std::abs(knot.r.squaredNorm() - 1.0));
      if (mg.cut_active)
        track(&rep.cut, std::max(0.0, mg.cut_offset - mg.cut_normal.dot(knot.r)));
    }
    if (seg.kind == modes::ModeKind::kContact) {
      const auto& face = mg.decomp.faces().at(seg.face);
      for (size_t k = 0; k < seg.knots.size(); ++k) {
        track(&rep.contact_gap, std::abs(mg.decomp.gap(seg.face, seg.knots[k].p_p)));
        const double lam = seg.knots[k].lam_c;
        track(&rep.friction, std::max(0.0, -lam));
        track(&rep.friction, std::max(0.0, lam - face.length));
      }
      for (size_t k = 0; k + 1 < seg.knots.size(); ++k) {
        const auto& a = seg.knots[k];
        const auto& b = seg.knots[k + 1];
        const auto& u = seg.inputs[k];
        // Translation rows.
        const Eigen::Vector2d v = u.f / model.c_f;
        const Eigen::Vector2d rot(a.r.x() * v.x() - a.r.y() * v.y(),
                                  a.r.y() * v.x() + a.r.x() * v.y());
        track(&rep.dynamics, ((b.p_s - a.p_s) - h * rot).lpNorm<Eigen::Infinity>());
        // Midpoint rotation rows.
        const double omega = u.tau / model.c_tau;
        const Eigen::Vector2d rsum = a.r + b.r;
        const Eigen::Vector2d jr(-rsum.y(), rsum.x());
        track(&rep.dynamics, ((b.r - a.r) - 0.5 * h * omega * jr).lpNorm<Eigen::Infinity>());
        // Torque definition at the contact point.
        const Eigen::Vector2d p_c = a.p_p - rho * face.outward_normal;
        track(&rep.dynamics,
              std::abs(u.tau - (p_c.x() * u.f.y() - p_c.y() * u.f.x())));
        // Friction cone and sticking.
        track(&rep.friction, std::max(0.0, -u.lam_n));
        track(&rep.friction,
              std::max(0.0, std::abs(u.lam_f) - task.friction.mu_pusher * u.lam_n));
        track(&rep.sticking, std::abs(b.lam_c - a.lam_c));
      }
    } else {
      for (size_t k = 0; k < seg.knots.size(); ++k) {
        const auto& region = mg.decomp.regions().at(seg.face);
        for (const auto& hs : region.halfspaces)
          track(&rep.region, std::max(0.0, hs.b - hs.a.dot(seg.knots[k].p_p)));
        track(&rep.region, (seg.knots[k].p_s - seg.knots[0].p_s).lpNorm<Eigen::Infinity>());
        track(&rep.region, (seg.knots[k].r - seg.knots[0].r).lpNorm<Eigen::Infinity>());
      }
      for (size_t k = 0; k + 1 < seg.knots.size(); ++k)
        track(&rep.dynamics, ((seg.knots[k + 1].p_p - seg.knots[k].p_p) -
                              h * seg.inputs[k].v_p)
                                 .lpNorm<Eigen::Infinity>());
    }
  }

  // Continuity across segments and against the task endpoints.
  auto state_gap = [](const modes::Knot& a, const modes::Knot& b) {
    double g = (a.p_s - b.p_s).lpNorm<Eigen::Infinity>();
    g = std::max(g, (a.r - b.r).lpNorm<Eigen::Infinity>());
    return std::max(g, (a.p_p - b.p_p).lpNorm<Eigen::Infinity>());
  };
  for (size_t s = 0; s + 1 < segments.size(); ++s)
    track(&rep.continuity, state_gap(segments[s].knots.back(), segments[s + 1].knots.front()));
  if (!segments.empty()) {
    modes::Knot source_knot;
    source_knot.p_s = task.slider_initial.head<2>();
    source_knot.r = task.r_initial();
    source_knot.p_p = task.pusher_initial;
    modes::Knot target_knot;
    target_knot.p_s = task.slider_target.head<2>();
    target_knot.r = task.r_target();
    target_knot.p_p = task.pusher_target;
    track(&rep.continuity, state_gap(segments.front().knots.front(), source_knot));
    track(&rep.continuity, state_gap(segments.back().knots.back(), target_knot));
  }
  return rep;
}

double ResidualReport::max_equality() const {
  return std::max({so2, dynamics, sticking, contact_gap, continuity});
}

double ResidualReport::max_any() const {
  return std::max({max_equality(), friction, region, cut});
}

double replay_plan(const TaskSpec& task, const ModeGraph& mg,
                   const std::vector<modes::KnotTrajectory>& segments) {
  dynamics::SliderPusherState sim;
  sim.p_s = task.slider_initial.head<2>();
  sim.r = task.r_initial();
  sim.p_p = task.pusher_initial;

  double worst = 0.0;
  for (const auto& seg : segments) {
    for (size_t k = 0; k + 1 < seg.knots.size(); ++k) {
      dynamics::StepInput u;
      u.v_p = seg.inputs[k].v_p;
      if (seg.kind == modes::ModeKind::kContact) {
        const auto& face = mg.decomp.faces().at(seg.face);
        u.f = seg.inputs[k].f;
        u.p_c = seg.knots[k].p_p - task.pusher.radius * face.outward_normal;
      }
      sim = dynamics::integrate_step(sim, u, seg.timestep, mg.model);
      const auto& plan_knot = seg.knots[k + 1];
      worst = std::max(worst, (sim.p_s - plan_knot.p_s).lpNorm<Eigen::Infinity>());
      worst = std::max(worst, (sim.r - plan_knot.r).lpNorm<Eigen::Infinity>());
      worst = std::max(worst, (sim.p_p - plan_knot.p_p).lpNorm<Eigen::Infinity>());
    }
  }
  return worst;
}

PlanResult plan(const TaskSpec& task, const PlannerOptions& options) {
  const auto t_start = std::chrono::steady_clock::now();
  const ModeGraph mg = build_mode_graph(task);

  const gcs::FlowRelaxation relaxation = gcs::build_relaxation(mg.graph);
  const conic::SolveOptions flow_opts{.tolerance = options.solver_tolerance,
                                      .max_iterations = 400,
                                      .verbose = options.verbose};
  const auto flow_solution = relaxation.solve(mg.graph, flow_opts);
  const double relax_time = now_minus(t_start);
  if (!flow_solution.outcome.optimal())
    throw NoFeasiblePlan("relaxation solve failed: " +
                         std::string(conic::to_string(flow_solution.outcome.status)) +
                         (flow_solution.outcome.diagnostics.empty()
                              ? ""
                              : " (" + flow_solution.outcome.diagnostics + ")"));
  const double c_relax = flow_solution.cost;

  const auto t_round = std::chrono::steady_clock::now();
  std::vector<gcs::PathCandidate> candidates;
  try {
    candidates = gcs::round_paths(mg.graph, flow_solution.edge_flows,
                                  options.rounding_attempts, options.seed);
  } catch (const gcs::NoPathFound& e) {
    throw NoFeasiblePlan(std::string("rounding failed: ") + e.what());
  }

  struct Scored {
    double cost;
    gcs::PathCandidate path;
    gcs::RestrictionSolution restriction;
  };
  std::vector<Scored> scored;
  const conic::SolveOptions restriction_opts{.tolerance = options.solver_tolerance,
                                             .max_iterations = 400};
  for (const auto& path : candidates) {
    try {
      auto restriction = gcs::solve_restriction(mg.graph, path, restriction_opts);
      if (restriction.outcome.optimal())
        scored.push_back({restriction.cost, path, std::move(restriction)});
    } catch (const gcs::InfeasibleRestriction&) {
      continue;
    }
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored& a, const Scored& b) { return a.cost < b.cost; });
  const double round_time = now_minus(t_round);

  const auto t_refine = std::chrono::steady_clock::now();
  PlanResult result;
  result.candidates_found = static_cast<int>(scored.size());
  double best_cost = std::numeric_limits<double>::infinity();
  bool have_plan = false;
  std::string failure_notes;

  const int budget = std::min<int>(options.max_refine_candidates, scored.size());
  for (int ci = 0; ci < budget; ++ci) {
    const auto& cand = scored[ci];
    const PathModes pm = collect_path_modes(mg, cand.path);
    if (pm.vertices.empty()) continue;
    const RefinementProblem rp = build_refinement_problem(task, mg, pm);

    std::vector<double> guess(pm.num_vars, 0.0);
    // The restriction's first-moment values seed the local solve.
    {
      size_t mode_index = 0;
      for (size_t pi = 0; pi < cand.path.vertices.size(); ++pi) {
        const VertexInfo& vi = mg.info[cand.path.vertices[pi]];
        if (vi.kind != VertexKind::kContact && vi.kind != VertexKind::kNonContact) continue;
        const auto& values = cand.restriction.vertex_values[pi];
        const int nv = pm.transcriptions[mode_index]->layout.num_vars;
        for (int j = 0; j < nv; ++j) guess[pm.offsets[mode_index] + j] = values[j];
        ++mode_index;
      }
    }

    ++result.candidates_refined;
    const RefinementOutcome refined = nonconvex_refine(rp, guess, options);
    if (!refined.converged) {
      failure_notes += "candidate " + std::to_string(ci) + ": residual " +
                       std::to_string(refined.max_quadratic_residual) + "; ";
      continue;
    }
    if (refined.cost < best_cost) {
      best_cost = refined.cost;
      result.mode_sequence = cand.path.vertices;
      result.segments.clear();
      result.mode_names.clear();
      for (size_t m = 0; m < pm.vertices.size(); ++m) {
        const auto& tr = *pm.transcriptions[m];
        std::vector<double> y(refined.values.begin() + pm.offsets[m],
                              refined.values.begin() + pm.offsets[m] + tr.layout.num_vars);
        result.segments.push_back(modes::trajectory_from_values(tr, y));
        result.mode_names.push_back(mg.graph.vertex(pm.vertices[m]).name);
      }
      have_plan = true;
    }
    if (have_plan && ci >= 1) break;  // best restriction refined plus one fallback
  }
  const double refine_time = now_minus(t_refine);

  if (!have_plan)
    throw NoFeasiblePlan("no rounded candidate refined to a feasible trajectory (" +
                         std::to_string(scored.size()) + " candidates; " + failure_notes + ")");

  result.c_relax = c_relax;
  result.c_round = best_cost;
  result.gap = certify_gap(c_relax, best_cost);
  result.residuals = audit_plan(task, mg, result.segments);
  result.replay_error = replay_plan(task, mg, result.segments);
  result.relax_time_s = relax_time;
  result.round_time_s = round_time;
  result.refine_time_s = refine_time;

  for (const auto& seg : result.segments) {
    std::vector<dynamics::SpatialForce> raw;
    std::vector<dynamics::SpatialVelocity> vels;
    if (seg.kind == modes::ModeKind::kContact) {
      for (const auto& u : seg.inputs) {
        dynamics::SpatialForce F;
        F.f = u.f;
        F.tau = u.tau;
        raw.push_back(F);
        vels.push_back(dynamics::quasi_static_velocity(mg.model, F));
      }
    }
    result.forces.push_back(raw);
    result.forces_scaled.push_back(
        dynamics::rescale_forces_to_limit_surface(raw, vels, mg.model));
  }
  return result;
}

}  // namespace pushplan::planner
