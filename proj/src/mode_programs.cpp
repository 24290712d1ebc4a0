#include "pushplan/mode_programs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

namespace pushplan::modes {

using conic::AffineRow;

namespace {

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

}  // namespace

void CostWeights::validate() const {
  const double w[] = {k_p_pusher, k_p_slider,   k_v_pusher,  k_v_slider,
                      k_force,    k_contact_time, k_proximity};
  for (double v : w)
    if (!(v > 0.0)) throw dynamics::InvalidParams("cost weights must be positive");
}

void QuadraticConstraint::add_quad(int i, int j, double coef) {
  if (coef == 0.0) return;
  if (i > j) std::swap(i, j);
  quad.push_back({i, j, coef});
}

double QuadraticConstraint::evaluate(const std::vector<double>& y) const {
  double v = affine.evaluate(y);
  for (const auto& t : quad) v += t.coef * y[t.i] * y[t.j];
  return v;
}

void QuadraticConstraint::accumulate_gradient(const std::vector<double>& y, double scale,
                                              std::vector<double>* grad) const {
  for (const auto& t : affine.terms) (*grad)[t.var] += scale * t.coef;
  for (const auto& t : quad) {
    (*grad)[t.i] += scale * t.coef * y[t.j];
    (*grad)[t.j] += scale * t.coef * y[t.i];
  }
}

std::vector<int> QuadraticConstraint::support() const {
  std::set<int> s;
  for (const auto& t : affine.terms) s.insert(t.var);
  for (const auto& t : quad) {
    s.insert(t.i);
    s.insert(t.j);
  }
  return {s.begin(), s.end()};
}

double CostAtom::evaluate(const std::vector<double>& y) const {
  switch (kind) {
    case CostAtomKind::kNorm: {
      double s = 0.0;
      for (const auto& a : args) {
        const double v = a.evaluate(y);
        s += v * v;
      }
      return weight * std::sqrt(s);
    }
    case CostAtomKind::kQuadratic: {
      double s = 0.0;
      for (const auto& a : args) {
        const double v = a.evaluate(y);
        s += v * v;
      }
      return weight * s;
    }
    case CostAtomKind::kProximity:
      return weight / (1.0 + gap.evaluate(y) / k_phi);
    case CostAtomKind::kConstant:
      return weight;
  }
  return 0.0;
}

int VariableLayout::p_s(int axis) const { return p_s(0, axis); }
int VariableLayout::r(int comp) const { return r(0, comp); }

int VariableLayout::p_s(int knot, int axis) const {
  return kind == ModeKind::kContact ? 5 * knot + axis : axis;
}
int VariableLayout::r(int knot, int comp) const {
  return kind == ModeKind::kContact ? 5 * knot + 2 + comp : 2 + comp;
}
int VariableLayout::lam_c(int knot) const { return 5 * knot + 4; }
int VariableLayout::lam_n(int interval) const { return 5 * num_knots + 3 * interval; }
int VariableLayout::lam_f(int interval) const { return 5 * num_knots + 3 * interval + 1; }
int VariableLayout::tau(int interval) const { return 5 * num_knots + 3 * interval + 2; }
int VariableLayout::p_p(int knot, int axis) const { return 4 + 2 * knot + axis; }
int VariableLayout::v_p(int interval, int axis) const {
  return 4 + 2 * num_knots + 2 * interval + axis;
}

namespace {

void add_box_rows(std::vector<AffineConstraint>* affine, int var, double lo, double hi,
                  const std::string& label) {
  affine->push_back({AffineRow({{var, 1.0}}, -lo), Sense::kGe, label + " lower"});
  affine->push_back({AffineRow({{var, -1.0}}, hi), Sense::kGe, label + " upper"});
}

// Affine rows of a slider vertex position in the world frame: linear in
// (p_s, r) with the vertex coordinates fixed.
std::array<AffineRow, 2> vertex_position_rows(const VariableLayout& layout, int knot,
                                              const Eigen::Vector2d& nu) {
  AffineRow x, y;
  x.add_term(layout.p_s(knot, 0), 1.0);
  x.add_term(layout.r(knot, 0), nu.x());
  x.add_term(layout.r(knot, 1), -nu.y());
  y.add_term(layout.p_s(knot, 1), 1.0);
  y.add_term(layout.r(knot, 0), nu.y());
  y.add_term(layout.r(knot, 1), nu.x());
  return {x, y};
}

}  // namespace

ModeTranscription build_contact_mode(int face, const geometry::SliderGeometry& geometry,
                                     const geometry::RegionDecomposition& decomp,
                                     const dynamics::LimitSurfaceModel& model,
                                     double mu_pusher, const CostWeights& weights,
                                     int num_knots, double timestep,
                                     const TranscriptionBounds& bounds) {
  if (num_knots < 2) throw InvalidKnots("contact mode needs at least 2 knot points");
  if (!(timestep > 0.0)) throw InvalidKnots("timestep must be positive");
  weights.validate();

  const geometry::Face& f = geometry.faces().at(face);
  const int n = num_knots;
  const double h = timestep;
  const double rho = decomp.pusher_radius();
  const double hw = bounds.workspace_side / 2.0;
  const double f_max = bounds.force_max;
  const double tau_max = 1.5 * geometry.characteristic_radius() * f_max;

  ModeTranscription tr;
  tr.kind = ModeKind::kContact;
  tr.face = face;
  tr.num_knots = n;
  tr.timestep = h;
  tr.layout = {ModeKind::kContact, n, 5 * n + 3 * (n - 1)};
  tr.face_origin = f.q_start;
  tr.face_normal = f.outward_normal;
  tr.face_tangent = f.tangent;
  tr.face_length = f.length;
  tr.pusher_radius = rho;
  tr.c_f = model.c_f;
  tr.c_tau = model.c_tau;
  const VariableLayout& L = tr.layout;

  // Bounds keep the set compact and feed the relaxation's RLT products.
  for (int k = 0; k < n; ++k) {
    add_box_rows(&tr.affine, L.p_s(k, 0), -hw, hw, "p_s x");
    add_box_rows(&tr.affine, L.p_s(k, 1), -hw, hw, "p_s y");
    add_box_rows(&tr.affine, L.r(k, 0), -1.0, 1.0, "cos");
    add_box_rows(&tr.affine, L.r(k, 1), -1.0, 1.0, "sin");
    add_box_rows(&tr.affine, L.lam_c(k), 0.0, f.length, "lam_c");
  }
  for (int k = 0; k < n - 1; ++k) {
    // Friction cone: lam_n >= 0, |lam_f| <= mu lam_n.
    tr.affine.push_back({AffineRow({{L.lam_n(k), 1.0}}, 0.0), Sense::kGe, "friction normal"});
    tr.affine.push_back({AffineRow({{L.lam_n(k), mu_pusher}, {L.lam_f(k), -1.0}}, 0.0),
                         Sense::kGe, "friction cone left"});
    tr.affine.push_back({AffineRow({{L.lam_n(k), mu_pusher}, {L.lam_f(k), 1.0}}, 0.0),
                         Sense::kGe, "friction cone right"});
    tr.affine.push_back({AffineRow({{L.lam_n(k), -1.0}}, f_max), Sense::kGe, "force bound"});
    add_box_rows(&tr.affine, L.tau(k), -tau_max, tau_max, "torque");
    // Sticking: the contact point is fixed along the face.
    tr.affine.push_back({AffineRow({{L.lam_c(k + 1), 1.0}, {L.lam_c(k), -1.0}}, 0.0),
                         Sense::kEq, "sticking"});
  }

  // SO(2): ||r_k||^2 = 1.
  for (int k = 0; k < n; ++k) {
    QuadraticConstraint so2;
    so2.label = "so2";
    so2.add_quad(L.r(k, 0), L.r(k, 0), 1.0);
    so2.add_quad(L.r(k, 1), L.r(k, 1), 1.0);
    so2.affine.constant = -1.0;
    tr.quadratics.push_back(std::move(so2));
  }

  const Eigen::Vector2d nh = f.outward_normal, th = f.tangent;
  for (int k = 0; k < n - 1; ++k) {
    // Torque definition: tau = p_c x f with p_c = q + lam_c t and
    // f = -lam_n n + lam_f t.
    QuadraticConstraint torque;
    torque.label = "torque";
    torque.affine.add_term(L.tau(k), 1.0);
    torque.affine.add_term(L.lam_n(k), cross2(f.q_start, nh));
    torque.affine.add_term(L.lam_f(k), -cross2(f.q_start, th));
    torque.add_quad(L.lam_c(k), L.lam_n(k), cross2(th, nh));
    tr.quadratics.push_back(std::move(torque));

    // World-frame translation dynamics: dp_s = (h/c_f) R(r_k) f_k with
    // f = -lam_n n + lam_f t and R(r) f = (c f_x - s f_y, s f_x + c f_y).
    const double a = h / model.c_f;
    const int rc = L.r(k, 0), rs = L.r(k, 1);
    {
      QuadraticConstraint dyn;
      dyn.label = "dynamics x";
      dyn.affine.add_term(L.p_s(k + 1, 0), 1.0);
      dyn.affine.add_term(L.p_s(k, 0), -1.0);
      dyn.add_quad(rc, L.lam_n(k), a * nh.x());
      dyn.add_quad(rc, L.lam_f(k), -a * th.x());
      dyn.add_quad(rs, L.lam_n(k), -a * nh.y());
      dyn.add_quad(rs, L.lam_f(k), a * th.y());
      tr.quadratics.push_back(std::move(dyn));
    }
    {
      QuadraticConstraint dyn;
      dyn.label = "dynamics y";
      dyn.affine.add_term(L.p_s(k + 1, 1), 1.0);
      dyn.affine.add_term(L.p_s(k, 1), -1.0);
      dyn.add_quad(rs, L.lam_n(k), a * nh.x());
      dyn.add_quad(rs, L.lam_f(k), -a * th.x());
      dyn.add_quad(rc, L.lam_n(k), a * nh.y());
      dyn.add_quad(rc, L.lam_f(k), -a * th.y());
      tr.quadratics.push_back(std::move(dyn));
    }

    // Rotation rows, midpoint form: r_{k+1} - r_k = (h omega / 2) J (r_k + r_{k+1})
    // with omega = tau / c_tau. Preserves ||r|| exactly, stays quadratic.
    const double b = h / (2.0 * model.c_tau);
    QuadraticConstraint rot_x, rot_y;
    rot_x.label = "rotation x";
    rot_x.affine.add_term(L.r(k + 1, 0), 1.0);
    rot_x.affine.add_term(L.r(k, 0), -1.0);
    rot_x.add_quad(L.tau(k), L.r(k, 1), b);
    rot_x.add_quad(L.tau(k), L.r(k + 1, 1), b);
    rot_y.label = "rotation y";
    rot_y.affine.add_term(L.r(k + 1, 1), 1.0);
    rot_y.affine.add_term(L.r(k, 1), -1.0);
    rot_y.add_quad(L.tau(k), L.r(k, 0), -b);
    rot_y.add_quad(L.tau(k), L.r(k + 1, 0), -b);
    tr.quadratics.push_back(std::move(rot_x));
    tr.quadratics.push_back(std::move(rot_y));
  }

  // Band groups: one per knot pair.
  for (int k = 0; k < n - 1; ++k) {
    std::vector<int> g;
    for (int kk = k; kk <= k + 1; ++kk) {
      g.push_back(L.p_s(kk, 0));
      g.push_back(L.p_s(kk, 1));
      g.push_back(L.r(kk, 0));
      g.push_back(L.r(kk, 1));
      g.push_back(L.lam_c(kk));
    }
    g.push_back(L.lam_n(k));
    g.push_back(L.lam_f(k));
    g.push_back(L.tau(k));
    std::sort(g.begin(), g.end());
    tr.band_groups.push_back(std::move(g));
  }

  // Cost.
  const auto& verts = geometry.vertices();
  const double inv_nv = 1.0 / static_cast<double>(verts.size());
  for (int k = 0; k < n - 1; ++k) {
    // Pusher arc length: ||dp_p|| = |dlam_c|.
    CostAtom arc_p;
    arc_p.kind = CostAtomKind::kNorm;
    arc_p.weight = weights.k_p_pusher;
    arc_p.label = "pusher arc";
    AffineRow dlam;
    dlam.add_term(L.lam_c(k + 1), 1.0);
    dlam.add_term(L.lam_c(k), -1.0);
    arc_p.args.push_back(dlam);
    tr.cost.push_back(std::move(arc_p));

    // Pusher energy: ||v_p||^2 = (dlam_c / h)^2.
    CostAtom en_p;
    en_p.kind = CostAtomKind::kQuadratic;
    en_p.weight = weights.k_v_pusher;
    en_p.label = "pusher energy";
    AffineRow dlam_h;
    dlam_h.add_term(L.lam_c(k + 1), 1.0 / h);
    dlam_h.add_term(L.lam_c(k), -1.0 / h);
    en_p.args.push_back(dlam_h);
    tr.cost.push_back(std::move(en_p));

    // Slider arc length and energy through the vertex mean.
    for (const auto& nu : verts) {
      const auto rows_k = vertex_position_rows(L, k, nu);
      const auto rows_k1 = vertex_position_rows(L, k + 1, nu);
      CostAtom arc_s;
      arc_s.kind = CostAtomKind::kNorm;
      arc_s.weight = weights.k_p_slider * inv_nv;
      arc_s.label = "slider arc";
      arc_s.args.push_back(rows_k1[0] - rows_k[0]);
      arc_s.args.push_back(rows_k1[1] - rows_k[1]);
      tr.cost.push_back(std::move(arc_s));

      CostAtom en_s;
      en_s.kind = CostAtomKind::kQuadratic;
      en_s.weight = weights.k_v_slider * inv_nv;
      en_s.label = "slider energy";
      AffineRow vx = rows_k1[0] - rows_k[0];
      AffineRow vy = rows_k1[1] - rows_k[1];
      vx *= 1.0 / h;
      vy *= 1.0 / h;
      en_s.args.push_back(std::move(vx));
      en_s.args.push_back(std::move(vy));
      tr.cost.push_back(std::move(en_s));
    }

    // Force regularization: k_f h ||f||^2, with ||f||^2 = lam_n^2 + lam_f^2.
    CostAtom reg;
    reg.kind = CostAtomKind::kQuadratic;
    reg.weight = weights.k_force * h;
    reg.label = "force regularization";
    reg.args.push_back(AffineRow({{L.lam_n(k), 1.0}}, 0.0));
    reg.args.push_back(AffineRow({{L.lam_f(k), 1.0}}, 0.0));
    tr.cost.push_back(std::move(reg));
  }
  // In contact phi_i = 0, so psi is h k_T at every knot.
  for (int k = 0; k < n; ++k) {
    CostAtom psi;
    psi.kind = CostAtomKind::kConstant;
    psi.weight = h * weights.k_contact_time;
    psi.label = "psi";
    tr.cost.push_back(std::move(psi));
  }

  // Boundary states (p_s, r, p_p) with p_p = q + lam_c t + rho n.
  auto boundary = [&](int k) {
    std::vector<AffineRow> rows(6);
    rows[0].add_term(L.p_s(k, 0), 1.0);
    rows[1].add_term(L.p_s(k, 1), 1.0);
    rows[2].add_term(L.r(k, 0), 1.0);
    rows[3].add_term(L.r(k, 1), 1.0);
    rows[4].add_term(L.lam_c(k), th.x());
    rows[4].constant = f.q_start.x() + rho * nh.x();
    rows[5].add_term(L.lam_c(k), th.y());
    rows[5].constant = f.q_start.y() + rho * nh.y();
    return rows;
  };
  tr.entry_state = boundary(0);
  tr.exit_state = boundary(n - 1);
  return tr;
}

std::vector<QuadraticConstraint> ModeTranscription::slider_frame_dynamics_rows() const {
  std::vector<QuadraticConstraint> rows;
  if (kind != ModeKind::kContact) return rows;
  const VariableLayout& L = layout;
  const double a = timestep / c_f;
  for (int k = 0; k < num_knots - 1; ++k) {
    // R(r_k)' dp_s = (h/c_f) f_k, f = -lam_n n + lam_f t.
    const int rc = L.r(k, 0), rs = L.r(k, 1);
    {
      // c dx + s dy - a f_x = 0.
      QuadraticConstraint dyn;
      dyn.label = "dynamics slider-frame x";
      dyn.add_quad(rc, L.p_s(k + 1, 0), 1.0);
      dyn.add_quad(rc, L.p_s(k, 0), -1.0);
      dyn.add_quad(rs, L.p_s(k + 1, 1), 1.0);
      dyn.add_quad(rs, L.p_s(k, 1), -1.0);
      dyn.affine.add_term(L.lam_n(k), a * face_normal.x());
      dyn.affine.add_term(L.lam_f(k), -a * face_tangent.x());
      rows.push_back(std::move(dyn));
    }
    {
      // -s dx + c dy - a f_y = 0.
      QuadraticConstraint dyn;
      dyn.label = "dynamics slider-frame y";
      dyn.add_quad(rs, L.p_s(k + 1, 0), -1.0);
      dyn.add_quad(rs, L.p_s(k, 0), 1.0);
      dyn.add_quad(rc, L.p_s(k + 1, 1), 1.0);
      dyn.add_quad(rc, L.p_s(k, 1), -1.0);
      dyn.affine.add_term(L.lam_n(k), a * face_normal.y());
      dyn.affine.add_term(L.lam_f(k), -a * face_tangent.y());
      rows.push_back(std::move(dyn));
    }
  }
  return rows;
}

ModeTranscription build_noncontact_mode(int region, const geometry::SliderGeometry& geometry,
                                        const geometry::RegionDecomposition& decomp,
                                        const CostWeights& weights, int num_knots,
                                        double timestep, const TranscriptionBounds& bounds) {
  if (num_knots < 2) throw InvalidKnots("non-contact mode needs at least 2 knot points");
  if (!(timestep > 0.0)) throw InvalidKnots("timestep must be positive");
  weights.validate();
  (void)geometry;

  const int n = num_knots;
  const double h = timestep;
  const double hw = bounds.workspace_side / 2.0;

  ModeTranscription tr;
  tr.kind = ModeKind::kNonContact;
  tr.face = region;
  tr.num_knots = n;
  tr.timestep = h;
  tr.layout = {ModeKind::kNonContact, n, 4 + 2 * n + 2 * (n - 1)};
  tr.pusher_radius = decomp.pusher_radius();
  const VariableLayout& L = tr.layout;

  add_box_rows(&tr.affine, L.p_s(0), -hw, hw, "p_s x");
  add_box_rows(&tr.affine, L.p_s(1), -hw, hw, "p_s y");
  add_box_rows(&tr.affine, L.r(0), -1.0, 1.0, "cos");
  add_box_rows(&tr.affine, L.r(1), -1.0, 1.0, "sin");

  const auto& halfspaces = decomp.regions().at(region).halfspaces;
  const double v_max = 2.0 * bounds.workspace_side / h;
  for (int k = 0; k < n; ++k) {
    for (size_t hsi = 0; hsi < halfspaces.size(); ++hsi) {
      const auto& hs = halfspaces[hsi];
      AffineRow row;
      row.add_term(L.p_p(k, 0), hs.a.x());
      row.add_term(L.p_p(k, 1), hs.a.y());
      row.constant = -hs.b;
      tr.affine.push_back({std::move(row), Sense::kGe, "region halfspace"});
    }
    add_box_rows(&tr.affine, L.p_p(k, 0), -hw, hw, "p_p x");
    add_box_rows(&tr.affine, L.p_p(k, 1), -hw, hw, "p_p y");
  }
  for (int k = 0; k < n - 1; ++k) {
    for (int axis = 0; axis < 2; ++axis) {
      AffineRow euler;
      euler.add_term(L.p_p(k + 1, axis), 1.0);
      euler.add_term(L.p_p(k, axis), -1.0);
      euler.add_term(L.v_p(k, axis), -h);
      tr.affine.push_back({std::move(euler), Sense::kEq, "pusher euler"});
      add_box_rows(&tr.affine, L.v_p(k, axis), -v_max, v_max, "v_p");
    }
  }

  const auto [gap_a, gap_b] = decomp.gap_coefficients(region);
  for (int k = 0; k < n - 1; ++k) {
    CostAtom arc;
    arc.kind = CostAtomKind::kNorm;
    arc.weight = weights.k_p_pusher;
    arc.label = "pusher arc";
    for (int axis = 0; axis < 2; ++axis) {
      AffineRow d;
      d.add_term(L.p_p(k + 1, axis), 1.0);
      d.add_term(L.p_p(k, axis), -1.0);
      arc.args.push_back(std::move(d));
    }
    tr.cost.push_back(std::move(arc));

    CostAtom energy;
    energy.kind = CostAtomKind::kQuadratic;
    energy.weight = weights.k_v_pusher;
    energy.label = "pusher energy";
    energy.args.push_back(AffineRow({{L.v_p(k, 0), 1.0}}, 0.0));
    energy.args.push_back(AffineRow({{L.v_p(k, 1), 1.0}}, 0.0));
    tr.cost.push_back(std::move(energy));
  }
  for (int k = 0; k < n; ++k) {
    CostAtom psi;
    psi.kind = CostAtomKind::kProximity;
    psi.weight = h * weights.k_contact_time;
    psi.k_phi = weights.k_proximity;
    psi.label = "psi";
    psi.gap.add_term(L.p_p(k, 0), gap_a.x());
    psi.gap.add_term(L.p_p(k, 1), gap_a.y());
    psi.gap.constant = gap_b;
    tr.cost.push_back(std::move(psi));
  }

  auto boundary = [&](int k) {
    std::vector<AffineRow> rows(6);
    rows[0].add_term(L.p_s(0), 1.0);
    rows[1].add_term(L.p_s(1), 1.0);
    rows[2].add_term(L.r(0), 1.0);
    rows[3].add_term(L.r(1), 1.0);
    rows[4].add_term(L.p_p(k, 0), 1.0);
    rows[5].add_term(L.p_p(k, 1), 1.0);
    return rows;
  };
  tr.entry_state = boundary(0);
  tr.exit_state = boundary(n - 1);
  return tr;
}

const std::vector<CostAtom>& cost_terms(const ModeTranscription& transcription) {
  return transcription.cost;
}

double evaluate_cost(const ModeTranscription& transcription, const std::vector<double>& y) {
  if (static_cast<int>(y.size()) != transcription.layout.num_vars)
    throw MismatchedLayout("value vector does not match the mode layout");
  double total = 0.0;
  for (const auto& atom : transcription.cost) total += atom.evaluate(y);
  return total;
}

double max_affine_violation(const ModeTranscription& transcription,
                            const std::vector<double>& y) {
  double worst = 0.0;
  for (const auto& c : transcription.affine) {
    const double v = c.row.evaluate(y);
    worst = std::max(worst, c.sense == Sense::kEq ? std::abs(v) : std::max(0.0, -v));
  }
  return worst;
}

double max_quadratic_violation(const ModeTranscription& transcription,
                               const std::vector<double>& y) {
  double worst = 0.0;
  for (const auto& c : transcription.quadratics) {
    const double v = c.evaluate(y);
    worst = std::max(worst, c.sense == Sense::kEq ? std::abs(v) : std::max(0.0, -v));
  }
  return worst;
}

KnotTrajectory trajectory_from_values(const ModeTranscription& tr,
                                      const std::vector<double>& y) {
  if (static_cast<int>(y.size()) != tr.layout.num_vars)
    throw MismatchedLayout("value vector does not match the mode layout");
  const VariableLayout& L = tr.layout;
  KnotTrajectory out;
  out.kind = tr.kind;
  out.face = tr.face;
  out.timestep = tr.timestep;
  out.knots.resize(tr.num_knots);
  out.inputs.resize(tr.num_knots - 1);
  for (int k = 0; k < tr.num_knots; ++k) {
    Knot& knot = out.knots[k];
    knot.p_s = {y[L.p_s(k, 0)], y[L.p_s(k, 1)]};
    knot.r = {y[L.r(k, 0)], y[L.r(k, 1)]};
    if (tr.kind == ModeKind::kContact) {
      knot.lam_c = y[L.lam_c(k)];
      knot.p_p = tr.face_origin + knot.lam_c * tr.face_tangent +
                 tr.pusher_radius * tr.face_normal;
    } else {
      knot.p_p = {y[L.p_p(k, 0)], y[L.p_p(k, 1)]};
    }
  }
  for (int k = 0; k < tr.num_knots - 1; ++k) {
    IntervalInput& u = out.inputs[k];
    if (tr.kind == ModeKind::kContact) {
      u.lam_n = y[L.lam_n(k)];
      u.lam_f = y[L.lam_f(k)];
      u.tau = y[L.tau(k)];
      u.f = -u.lam_n * tr.face_normal + u.lam_f * tr.face_tangent;
      u.v_p = (out.knots[k + 1].p_p - out.knots[k].p_p) / tr.timestep;
    } else {
      u.v_p = {y[L.v_p(k, 0)], y[L.v_p(k, 1)]};
    }
  }
  return out;
}

std::vector<double> values_from_trajectory(const ModeTranscription& tr,
                                           const KnotTrajectory& trajectory) {
  if (static_cast<int>(trajectory.knots.size()) != tr.num_knots)
    throw MismatchedLayout("trajectory knot count does not match the mode");
  const VariableLayout& L = tr.layout;
  std::vector<double> y(tr.layout.num_vars, 0.0);
  for (int k = 0; k < tr.num_knots; ++k) {
    const Knot& knot = trajectory.knots[k];
    y[L.p_s(k, 0)] = knot.p_s.x();
    y[L.p_s(k, 1)] = knot.p_s.y();
    y[L.r(k, 0)] = knot.r.x();
    y[L.r(k, 1)] = knot.r.y();
    if (tr.kind == ModeKind::kContact)
      y[L.lam_c(k)] = knot.lam_c;
    else {
      y[L.p_p(k, 0)] = knot.p_p.x();
      y[L.p_p(k, 1)] = knot.p_p.y();
    }
  }
  for (int k = 0; k < tr.num_knots - 1; ++k) {
    const IntervalInput& u = trajectory.inputs[k];
    if (tr.kind == ModeKind::kContact) {
      y[L.lam_n(k)] = u.lam_n;
      y[L.lam_f(k)] = u.lam_f;
      y[L.tau(k)] = u.tau;
    } else {
      y[L.v_p(k, 0)] = u.v_p.x();
      y[L.v_p(k, 1)] = u.v_p.y();
    }
  }
  return y;
}

}  // namespace pushplan::modes
