#pragma once

#include <Eigen/Core>

#include "cablelift/state.hpp"
#include "cablelift/system_config.hpp"
#include "cablelift/types.hpp"

namespace cablelift {

/// Recovered reference for one UAV at one instant.
struct UavReference {
  Vec3d position = Vec3d::Zero();   // m
  Vec3d velocity = Vec3d::Zero();   // m/s
  double thrust = 0.0;              // collective thrust magnitude f_i (N)
  Vec3d thrust_dir = Vec3d::UnitZ();  // unit z_i
  Quatd attitude = Quatd(1, 0, 0, 0);
  Vec3d body_rate = Vec3d::Zero();  // rad/s
  double heading = 0.0;             // psi_i (rad)
  double body_rate_residual = 0.0;  // |scalar part| of the rate recovery
};

/// p_i = p + R rho_i - l_i s_i (taut-cable kinematics).
Vec3d uav_position(const LoadCableState& x, int i, const SystemConfig& cfg);

/// v_i = v + R (omega x rho_i) - l_i (r_i x s_i).
Vec3d uav_velocity(const LoadCableState& x, int i, const SystemConfig& cfg);

struct ThrustVector {
  double magnitude = 0.0;  // f_i (N)
  Vec3d direction = Vec3d::UnitZ();  // z_i, unit
  Vec3d force = Vec3d::Zero();       // f_i z_i (N)
};

/// Collective thrust from twice-differentiated cable kinematics:
///   f_i z_i = m_i (a_i - g) - t_i s_i,
///   a_i = vdot + R(wdot x rho + w x (w x rho)) - l_i (rdot_i x s_i)
///         - l_i r_i x (r_i x s_i).
/// x_dot must be dynamics(x, u, cfg). Throws DegenerateThrust below 1e-9 N.
ThrustVector thrust_vector(const LoadCableState& x, const ControlInput& u,
                           const VecXd& x_dot, int i, const SystemConfig& cfg);

/// UAV acceleration a_i used by thrust_vector, exposed for diagnostics.
Vec3d uav_acceleration(const LoadCableState& x, const VecXd& x_dot, int i,
                       const SystemConfig& cfg);

/// Attitude with body z along the thrust direction and heading psi:
///   e = [cos psi, sin psi, 0], y = (z x e)/|z x e|, x = y x z,
///   q = rotmat_to_quat([x y z]).
/// Throws SingularHeading when z is parallel to e.
Quatd reference_attitude(const Vec3d& thrust_dir, double psi);

struct BodyRateEstimate {
  Vec3d omega = Vec3d::Zero();
  double scalar_residual = 0.0;
};

/// Body rate from consecutive attitudes by the trapezoidal finite difference
///   [0, w] = (4/dt) (Q(q_k1) + Q(q_k))^{-1} (q_k1 - q_k),
/// with hemisphere alignment of q_k1 applied first. Throws DegenerateStep for
/// an (anti)parallel pair where the sum matrix is singular.
BodyRateEstimate reference_body_rate(const Quatd& q_k, const Quatd& q_k1, double dt);

/// Full reference for UAV i. Body rate is left zero; callers with consecutive
/// samples fill it via reference_body_rate.
UavReference recover_reference(const LoadCableState& x, const ControlInput& u,
                               const VecXd& x_dot, int i, const SystemConfig& cfg,
                               double psi);

}  // namespace cablelift
