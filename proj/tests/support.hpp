#pragma once

// Shared test helpers: deterministic random generators for states, inputs and
// rotations, plus finite-difference oracles kept independent of the analytic
// derivative paths they check.

#include <functional>
#include <random>

#include "cablelift/geometry.hpp"
#include "cablelift/model.hpp"
#include "cablelift/state.hpp"
#include "cablelift/system_config.hpp"

namespace cablelift::testing {

inline std::mt19937& rng() {
  static std::mt19937 gen(0x5eed);
  return gen;
}

inline double uniform(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng());
}

inline Vec3d random_vec3(double scale = 1.0) {
  return Vec3d(uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale));
}

inline Quatd random_unit_quat() {
  Quatd q;
  for (int i = 0; i < 4; ++i) q(i) = uniform(-1.0, 1.0);
  while (q.norm() < 1e-3) {
    for (int i = 0; i < 4; ++i) q(i) = uniform(-1.0, 1.0);
  }
  return q.normalized();
}

inline Mat3d random_rotation() { return quat_to_rotmat<double>(random_unit_quat()); }

/// Random state with taut-plausible cable directions (pointing mostly down)
/// and moderate rates.
inline LoadCableState random_state(const SystemConfig& cfg, double rate_scale = 0.5) {
  LoadCableState x(cfg.n);
  x.position() = random_vec3(5.0);
  x.velocity() = random_vec3(2.0);
  x.quaternion() = random_unit_quat();
  x.angular_velocity() = random_vec3(rate_scale);
  for (int i = 0; i < cfg.n; ++i) {
    Vec3d s = Vec3d(uniform(-0.5, 0.5), uniform(-0.5, 0.5), uniform(-1.5, -0.7));
    x.cable_dir(i) = s.normalized();
    x.cable_rate(i) = random_vec3(rate_scale);
    x.cable_rate_dot(i) = random_vec3(rate_scale);
  }
  return x;
}

inline ControlInput random_input(const SystemConfig& cfg) {
  ControlInput u(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    u.jerk(i) = random_vec3(2.0);
    u.tension(i) = uniform(6.0, 14.0);
  }
  return u;
}

/// Central finite-difference Jacobian of a vector map.
inline MatXd fd_jacobian(const std::function<VecXd(const VecXd&)>& f, const VecXd& at,
                         double h = 1e-6) {
  const VecXd f0 = f(at);
  MatXd j(f0.size(), at.size());
  for (int k = 0; k < at.size(); ++k) {
    VecXd hi = at, lo = at;
    hi(k) += h;
    lo(k) -= h;
    j.col(k) = (f(hi) - f(lo)) / (2.0 * h);
  }
  return j;
}

/// Central finite-difference gradient of a scalar map.
inline VecXd fd_gradient(const std::function<double(const VecXd&)>& f, const VecXd& at,
                         double h = 1e-6) {
  VecXd g(at.size());
  for (int k = 0; k < at.size(); ++k) {
    VecXd hi = at, lo = at;
    hi(k) += h;
    lo(k) -= h;
    g(k) = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

inline double rel_err(const MatXd& got, const MatXd& want) {
  const double scale = std::max(1.0, want.cwiseAbs().maxCoeff());
  return (got - want).cwiseAbs().maxCoeff() / scale;
}

}  // namespace cablelift::testing
