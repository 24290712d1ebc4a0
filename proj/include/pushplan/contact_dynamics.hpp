#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <vector>

#include "pushplan/geometry.hpp"

namespace pushplan::dynamics {

struct InvalidParams : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MismatchedLayout : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FrictionParams {
  double mu_table = 0.5;              // slider-table friction coefficient
  double mu_pusher = 0.05;            // pusher-slider friction coefficient
  double integration_constant = 0.3;  // c in [0, 1], geometry-dependent
  double mass = 1.0;                  // kg
  double gravity = 9.81;              // m/s^2

  void validate() const;  // throws InvalidParams
};

// Ellipsoidal limit surface H(F) = (1/2) F' D F with D = diag(1/c_f, 1/c_f,
// 1/c_tau); maps applied spatial contact force to quasi-static velocity.
struct LimitSurfaceModel {
  double c_f = 0.0;    // N
  double c_tau = 0.0;  // N*m

  Eigen::Matrix3d D() const;
  double H(const Eigen::Vector3d& F) const { return 0.5 * F.dot(D() * F); }
};

LimitSurfaceModel limit_surface(const FrictionParams& params, double characteristic_radius);

// Planar spatial force (f_x, f_y, tau) in the slider frame.
struct SpatialForce {
  Eigen::Vector2d f = Eigen::Vector2d::Zero();
  double tau = 0.0;

  // Builds the spatial force of a Cartesian force applied at p_c:
  // tau = p_c x f.
  static SpatialForce at_contact_point(const Eigen::Vector2d& f, const Eigen::Vector2d& p_c);
  Eigen::Vector3d vec() const { return {f.x(), f.y(), tau}; }
};

struct SpatialVelocity {
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  double omega = 0.0;

  Eigen::Vector3d vec() const { return {v.x(), v.y(), omega}; }
};

// Contact Jacobian J with F = J' f:  J = [[1, 0, -p_y], [0, 1, p_x]].
Eigen::Matrix<double, 2, 3> contact_jacobian(const Eigen::Vector2d& p_c);

// V = D F.
SpatialVelocity quasi_static_velocity(const LimitSurfaceModel& model, const SpatialForce& F);

// Scales each force with nonzero velocity so H(F) = 1 (force on the limit
// surface); forces at rest are returned unchanged.
std::vector<SpatialForce> rescale_forces_to_limit_surface(
    const std::vector<SpatialForce>& forces,
    const std::vector<SpatialVelocity>& velocities, const LimitSurfaceModel& model);

// Normal/tangential force components on a face: f = -lambda_n n + lambda_f t.
struct ContactForceDecomposition {
  double lambda_n = 0.0;  // along -n (into the face)
  double lambda_f = 0.0;  // along t
  int face = 0;

  Eigen::Vector2d cartesian(const geometry::Face& f) const {
    return -lambda_n * f.outward_normal + lambda_f * f.tangent;
  }
};

// Returns (lambda_n, mu*lambda_n - |lambda_f|); both nonnegative iff the
// force lies inside the friction cone.
std::pair<double, double> friction_cone_residuals(const ContactForceDecomposition& dec,
                                                  double mu);

enum class ContactModeKind { kSticking, kSlidingLeft, kSlidingRight };

// Affine constraint templates over (v_c_tangential, lambda_n, lambda_f):
//   sticking:      v = 0
//   sliding left:  v <= 0, lambda_f = -mu lambda_n
//   sliding right: v >= 0, lambda_f = +mu lambda_n
struct ModeConstraintTemplate {
  ContactModeKind kind = ContactModeKind::kSticking;
  double mu = 0.0;

  std::vector<double> equality_residuals(double v_t, double lambda_n, double lambda_f) const;
  // Values that must be >= 0.
  std::vector<double> inequality_residuals(double v_t, double lambda_n, double lambda_f) const;
  bool satisfied(double v_t, double lambda_n, double lambda_f, double tol = 1e-9) const;
};

ModeConstraintTemplate mode_constraint_builders(ContactModeKind kind, double mu);

// Full slider-pusher state (p_s world, r = (cos, sin), p_p slider frame).
struct SliderPusherState {
  Eigen::Vector2d p_s = Eigen::Vector2d::Zero();
  Eigen::Vector2d r = Eigen::Vector2d(1.0, 0.0);
  Eigen::Vector2d p_p = Eigen::Vector2d::Zero();

  Eigen::Matrix<double, 6, 1> vec() const;
  static SliderPusherState from_vec(const Eigen::Matrix<double, 6, 1>& x);
};

// Input over one interval: Cartesian contact force (slider frame) applied at
// p_c (slider frame), and commanded pusher velocity (slider frame).
struct StepInput {
  Eigen::Vector2d f = Eigen::Vector2d::Zero();
  Eigen::Vector2d p_c = Eigen::Vector2d::Zero();
  Eigen::Vector2d v_p = Eigen::Vector2d::Zero();
};

// Forward-Euler residual x_{k+1} - x_k - h g(x_k, u_k) with
// g = (R(r) D_ff f, omega J r, v_p), omega = tau / c_tau. Rows ordered
// (p_s, r, p_p). Throws MismatchedLayout on wrong dimensions.
Eigen::Matrix<double, 6, 1> euler_step_residual(const Eigen::VectorXd& x_k,
                                                const Eigen::VectorXd& x_next,
                                                const StepInput& u, double h,
                                                const LimitSurfaceModel& model);

// Analytic Jacobian of euler_step_residual wrt (x_k, x_next, f, v_p):
// 6 x 16, p_c held fixed.
Eigen::Matrix<double, 6, 16> euler_step_jacobian(const Eigen::VectorXd& x_k,
                                                 const Eigen::VectorXd& x_next,
                                                 const StepInput& u, double h,
                                                 const LimitSurfaceModel& model);

// Plan-consistent integrator: forward Euler on translations, midpoint
// (Cayley) update on the rotation parameters so the unit norm is preserved
// exactly; r is renormalized defensively afterwards.
SliderPusherState integrate_step(const SliderPusherState& x, const StepInput& u, double h,
                                 const LimitSurfaceModel& model);

}  // namespace pushplan::dynamics
