#include "cablelift/flatness.hpp"

#include <cmath>

#include "cablelift/geometry.hpp"

namespace cablelift {

namespace {

void check_index(int i, const SystemConfig& cfg, const char* who) {
  if (i < 0 || i >= cfg.n) {
    throw InvalidArgument(std::string(who) + ": UAV index out of range");
  }
}

}  // namespace

Vec3d uav_position(const LoadCableState& x, int i, const SystemConfig& cfg) {
  check_index(i, cfg, "uav_position");
  return Vec3d(x.position()) + x.rotation() * cfg.attachment.col(i) -
         cfg.cable_length(i) * Vec3d(x.cable_dir(i));
}

Vec3d uav_velocity(const LoadCableState& x, int i, const SystemConfig& cfg) {
  check_index(i, cfg, "uav_velocity");
  const Vec3d omega = x.angular_velocity();
  const Vec3d rate = x.cable_rate(i);
  return Vec3d(x.velocity()) + x.rotation() * omega.cross(Vec3d(cfg.attachment.col(i))) -
         cfg.cable_length(i) * rate.cross(Vec3d(x.cable_dir(i)));
}

Vec3d uav_acceleration(const LoadCableState& x, const VecXd& x_dot, int i,
                       const SystemConfig& cfg) {
  check_index(i, cfg, "uav_acceleration");
  const Vec3d v_dot = x_dot.segment<3>(3);
  const Vec3d w_dot = x_dot.segment<3>(10);
  const Vec3d omega = x.angular_velocity();
  const Vec3d rho = cfg.attachment.col(i);
  const Vec3d s = x.cable_dir(i);
  const Vec3d r = x.cable_rate(i);
  const Vec3d r_dot = x.cable_rate_dot(i);
  const double l = cfg.cable_length(i);
  return v_dot + x.rotation() * (w_dot.cross(rho) + omega.cross(omega.cross(rho))) -
         l * r_dot.cross(s) - l * r.cross(r.cross(s));
}

ThrustVector thrust_vector(const LoadCableState& x, const ControlInput& u,
                           const VecXd& x_dot, int i, const SystemConfig& cfg) {
  check_index(i, cfg, "thrust_vector");
  const Vec3d a = uav_acceleration(x, x_dot, i, cfg);
  ThrustVector out;
  out.force = cfg.uav_mass(i) * (a - cfg.gravity) - u.tension(i) * Vec3d(x.cable_dir(i));
  out.magnitude = out.force.norm();
  if (out.magnitude < 1e-9) {
    throw DegenerateThrust("thrust_vector: magnitude below 1e-9 N, direction undefined");
  }
  out.direction = out.force / out.magnitude;
  return out;
}

Quatd reference_attitude(const Vec3d& thrust_dir, double psi) {
  const Vec3d e(std::cos(psi), std::sin(psi), 0.0);
  const Vec3d zxe = thrust_dir.cross(e);
  const double n = zxe.norm();
  if (n < 1e-6) {
    throw SingularHeading("reference_attitude: thrust direction parallel to heading");
  }
  const Vec3d y = zxe / n;
  const Vec3d x_axis = y.cross(thrust_dir);
  Mat3d r;
  r.col(0) = x_axis;
  r.col(1) = y;
  r.col(2) = thrust_dir;
  return rotmat_to_quat<double>(r);
}

BodyRateEstimate reference_body_rate(const Quatd& q_k, const Quatd& q_k1_in, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("reference_body_rate: dt must be > 0");
  const Quatd q_k1 = align_hemisphere(q_k1_in, q_k);
  // After alignment the pair can still be orthogonal on S^3 (a 180-degree
  // rotation over one step); there the rate axis is undefined and the sum
  // matrix loses its conditioning margin.
  if (std::abs(q_k.dot(q_k1)) < 1e-8) {
    throw DegenerateStep("reference_body_rate: 180-degree step, rate undefined");
  }
  // Q(.) is linear, so Q(a) + Q(b) = Q(a+b) and for any p the inverse is
  // Q(p)^T / |p|^2.
  const Quatd sum = q_k + q_k1;
  const double nsq = sum.squaredNorm();
  if (nsq < 1e-12) {
    throw DegenerateStep("reference_body_rate: antipodal quaternion pair");
  }
  const Vec4d rate_quat = (4.0 / dt) *
                          (quat_product_matrix<double>(sum).transpose() * (q_k1 - q_k)) /
                          nsq;
  BodyRateEstimate out;
  out.omega = rate_quat.tail<3>();
  out.scalar_residual = std::abs(rate_quat(0));
  return out;
}

UavReference recover_reference(const LoadCableState& x, const ControlInput& u,
                               const VecXd& x_dot, int i, const SystemConfig& cfg,
                               double psi) {
  UavReference ref;
  ref.position = uav_position(x, i, cfg);
  ref.velocity = uav_velocity(x, i, cfg);
  const ThrustVector tv = thrust_vector(x, u, x_dot, i, cfg);
  ref.thrust = tv.magnitude;
  ref.thrust_dir = tv.direction;
  ref.attitude = reference_attitude(tv.direction, psi);
  ref.heading = psi;
  return ref;
}

}  // namespace cablelift
