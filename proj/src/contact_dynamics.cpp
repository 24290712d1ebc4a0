#include "pushplan/contact_dynamics.hpp"

#include <cmath>

namespace pushplan::dynamics {

void FrictionParams::validate() const {
  if (!(mu_table > 0.0)) throw InvalidParams("mu_table must be positive");
  if (!(mu_pusher >= 0.0)) throw InvalidParams("mu_pusher must be nonnegative");
  if (!(integration_constant >= 0.0 && integration_constant <= 1.0))
    throw InvalidParams("integration constant must lie in [0, 1]");
  if (!(mass > 0.0)) throw InvalidParams("mass must be positive");
  if (!(gravity > 0.0)) throw InvalidParams("gravity must be positive");
}

Eigen::Matrix3d LimitSurfaceModel::D() const {
  Eigen::Matrix3d d = Eigen::Matrix3d::Zero();
  d(0, 0) = 1.0 / c_f;
  d(1, 1) = 1.0 / c_f;
  d(2, 2) = 1.0 / c_tau;
  return d;
}

LimitSurfaceModel limit_surface(const FrictionParams& params, double characteristic_radius) {
  params.validate();
  if (!(characteristic_radius > 0.0))
    throw InvalidParams("characteristic radius must be positive");
  LimitSurfaceModel m;
  m.c_f = params.mu_table * params.mass * params.gravity;
  m.c_tau = params.integration_constant * characteristic_radius * m.c_f;
  return m;
}

SpatialForce SpatialForce::at_contact_point(const Eigen::Vector2d& f,
                                            const Eigen::Vector2d& p_c) {
  SpatialForce F;
  F.f = f;
  F.tau = p_c.x() * f.y() - p_c.y() * f.x();
  return F;
}

Eigen::Matrix<double, 2, 3> contact_jacobian(const Eigen::Vector2d& p_c) {
  Eigen::Matrix<double, 2, 3> j;
  j << 1.0, 0.0, -p_c.y(), 0.0, 1.0, p_c.x();
  return j;
}

SpatialVelocity quasi_static_velocity(const LimitSurfaceModel& model, const SpatialForce& F) {
  SpatialVelocity V;
  V.v = F.f / model.c_f;
  V.omega = F.tau / model.c_tau;
  return V;
}

std::vector<SpatialForce> rescale_forces_to_limit_surface(
    const std::vector<SpatialForce>& forces, const std::vector<SpatialVelocity>& velocities,
    const LimitSurfaceModel& model) {
  if (forces.size() != velocities.size())
    throw MismatchedLayout("force and velocity trajectories differ in length");
  std::vector<SpatialForce> out = forces;
  for (size_t k = 0; k < out.size(); ++k) {
    if (velocities[k].vec().norm() <= 1e-8) continue;
    const double q = out[k].vec().dot(model.D() * out[k].vec());
    if (q <= 0.0) continue;
    const double s = std::sqrt(2.0 / q);
    out[k].f *= s;
    out[k].tau *= s;
  }
  return out;
}

std::pair<double, double> friction_cone_residuals(const ContactForceDecomposition& dec,
                                                  double mu) {
  return {dec.lambda_n, mu * dec.lambda_n - std::abs(dec.lambda_f)};
}

std::vector<double> ModeConstraintTemplate::equality_residuals(double, double lambda_n,
                                                               double lambda_f) const {
  switch (kind) {
    case ContactModeKind::kSticking:
      return {};
    case ContactModeKind::kSlidingLeft:
      return {lambda_f + mu * lambda_n};
    case ContactModeKind::kSlidingRight:
      return {lambda_f - mu * lambda_n};
  }
  return {};
}

std::vector<double> ModeConstraintTemplate::inequality_residuals(double v_t, double,
                                                                 double) const {
  switch (kind) {
    case ContactModeKind::kSticking:
      return {};
    case ContactModeKind::kSlidingLeft:
      return {-v_t};
    case ContactModeKind::kSlidingRight:
      return {v_t};
  }
  return {};
}

bool ModeConstraintTemplate::satisfied(double v_t, double lambda_n, double lambda_f,
                                       double tol) const {
  if (kind == ContactModeKind::kSticking && std::abs(v_t) > tol) return false;
  for (double e : equality_residuals(v_t, lambda_n, lambda_f))
    if (std::abs(e) > tol) return false;
  for (double g : inequality_residuals(v_t, lambda_n, lambda_f))
    if (g < -tol) return false;
  return true;
}

ModeConstraintTemplate mode_constraint_builders(ContactModeKind kind, double mu) {
  return {kind, mu};
}

Eigen::Matrix<double, 6, 1> SliderPusherState::vec() const {
  Eigen::Matrix<double, 6, 1> x;
  x << p_s, r, p_p;
  return x;
}

SliderPusherState SliderPusherState::from_vec(const Eigen::Matrix<double, 6, 1>& x) {
  SliderPusherState s;
  s.p_s = x.segment<2>(0);
  s.r = x.segment<2>(2);
  s.p_p = x.segment<2>(4);
  return s;
}

Eigen::Matrix<double, 6, 1> euler_step_residual(const Eigen::VectorXd& x_k,
                                                const Eigen::VectorXd& x_next,
                                                const StepInput& u, double h,
                                                const LimitSurfaceModel& model) {
  if (x_k.size() != 6 || x_next.size() != 6)
    throw MismatchedLayout("state must have 6 entries (p_s, r, p_p)");
  const double c = x_k(2), s = x_k(3);
  const SpatialForce F = SpatialForce::at_contact_point(u.f, u.p_c);
  const Eigen::Vector2d v_slider = F.f / model.c_f;
  const double omega = F.tau / model.c_tau;

  Eigen::Matrix<double, 6, 1> g;
  g.segment<2>(0) = Eigen::Vector2d(c * v_slider.x() - s * v_slider.y(),
                                    s * v_slider.x() + c * v_slider.y());
  g.segment<2>(2) = omega * Eigen::Vector2d(-s, c);
  g.segment<2>(4) = u.v_p;
  return x_next - x_k - h * g;
}

Eigen::Matrix<double, 6, 16> euler_step_jacobian(const Eigen::VectorXd& x_k,
                                                 const Eigen::VectorXd& x_next,
                                                 const StepInput& u, double h,
                                                 const LimitSurfaceModel& model) {
  if (x_k.size() != 6 || x_next.size() != 6)
    throw MismatchedLayout("state must have 6 entries (p_s, r, p_p)");
  const double c = x_k(2), s = x_k(3);
  const double cf = model.c_f, ct = model.c_tau;
  const double tau = u.p_c.x() * u.f.y() - u.p_c.y() * u.f.x();

  // Columns: x_k (0..5), x_next (6..11), f (12..13), v_p (14..15).
  Eigen::Matrix<double, 6, 16> jac = Eigen::Matrix<double, 6, 16>::Zero();
  jac.block<6, 6>(0, 6).setIdentity();
  jac.block<6, 6>(0, 0) = -Eigen::Matrix<double, 6, 6>::Identity();

  // d/dr of -h * R(r) f / c_f.
  jac(0, 2) = -h * u.f.x() / cf;
  jac(0, 3) = h * u.f.y() / cf;
  jac(1, 2) = -h * u.f.y() / cf;
  jac(1, 3) = -h * u.f.x() / cf;
  // d/df of the p_s rows.
  jac(0, 12) = -h * c / cf;
  jac(0, 13) = h * s / cf;
  jac(1, 12) = -h * s / cf;
  jac(1, 13) = -h * c / cf;
  // r rows: residual_r = r_next - r - h (tau / c_tau) (-s, c).
  jac(2, 3) += h * tau / ct;
  jac(3, 2) += -h * tau / ct;
  const double dtau_dfx = -u.p_c.y(), dtau_dfy = u.p_c.x();
  jac(2, 12) = h * s / ct * dtau_dfx;
  jac(2, 13) = h * s / ct * dtau_dfy;
  jac(3, 12) = -h * c / ct * dtau_dfx;
  jac(3, 13) = -h * c / ct * dtau_dfy;
  // p_p rows.
  jac(4, 14) = -h;
  jac(5, 15) = -h;
  return jac;
}

SliderPusherState integrate_step(const SliderPusherState& x, const StepInput& u, double h,
                                 const LimitSurfaceModel& model) {
  const SpatialForce F = SpatialForce::at_contact_point(u.f, u.p_c);
  const SpatialVelocity V = quasi_static_velocity(model, F);
  const double c = x.r.x(), s = x.r.y();

  SliderPusherState next;
  next.p_s = x.p_s + h * Eigen::Vector2d(c * V.v.x() - s * V.v.y(),
                                         s * V.v.x() + c * V.v.y());
  // Cayley update: r+ = (I - a J)^{-1} (I + a J) r with a = h omega / 2;
  // exact rotation by 2 atan(a), preserves ||r||.
  const double a = 0.5 * h * V.omega;
  const double den = 1.0 + a * a;
  const Eigen::Vector2d jr(-x.r.y(), x.r.x());
  next.r = ((1.0 - a * a) * x.r + 2.0 * a * jr) / den;
  const double n = next.r.norm();
  if (n > 0.0) next.r /= n;
  next.p_p = x.p_p + h * u.v_p;
  return next;
}

}  // namespace pushplan::dynamics
