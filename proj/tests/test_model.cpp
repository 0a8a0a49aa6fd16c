#include <doctest.h>

#include <cmath>

#include "cablelift/flatness.hpp"
#include "cablelift/model.hpp"
#include "support.hpp"

using namespace cablelift;
using namespace cablelift::testing;

namespace {

SystemConfig quad() { return SystemConfig::demo_quad(); }

LoadCableState hover_state(const SystemConfig& cfg) {
  LoadCableState x(cfg.n);
  return x;  // default: q identity, cables straight down, rest zero
}

ControlInput hover_input(const SystemConfig& cfg) {
  ControlInput u(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    u.tension(i) = cfg.load_mass * cfg.gravity.norm() / cfg.n;
  }
  return u;
}

}  // namespace

TEST_CASE("symmetric hover is an equilibrium of the dynamics") {
  const auto cfg = quad();
  const VecXd dx = dynamics(hover_state(cfg), hover_input(cfg), cfg);
  CHECK(dx.lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("zero tension is free fall") {
  const auto cfg = quad();
  LoadCableState x = random_state(cfg);
  ControlInput u(cfg.n);  // all zero
  const VecXd dx = dynamics(x, u, cfg);
  CHECK((Vec3d(dx.segment<3>(3)) - cfg.gravity).norm() < 1e-12);
  const Vec3d omega = x.angular_velocity();
  const Vec3d want = cfg.inertia_inv * (-omega.cross(cfg.inertia * omega));
  CHECK((Vec3d(dx.segment<3>(10)) - want).norm() < 1e-12);
}

TEST_CASE("quaternion kinematics consistent with Rdot = R hat(omega)") {
  // Integrate the flow briefly and compare the finite-differenced rotation
  // matrix against R hat(omega) at the midpoint.
  const auto cfg = quad();
  const LoadCableState x0 = random_state(cfg);
  const ControlInput u = random_input(cfg);
  const double h = 1e-5;

  const LoadCableState xm = rk4_step(x0, u, cfg, h);
  const LoadCableState xp = rk4_step(xm, u, cfg, h);

  const Mat3d r_lo = quat_to_rotmat<double>(x0.quat());
  const Mat3d r_hi = quat_to_rotmat<double>(xp.quat());
  const Mat3d r_dot_fd = (r_hi - r_lo) / (2.0 * h);
  const Mat3d r_dot = xm.rotation() * hat<double>(Vec3d(xm.angular_velocity()));
  CHECK(rel_err(r_dot_fd, r_dot) < 1e-5);
}

TEST_CASE("rk4_step keeps the hover fixed point") {
  const auto cfg = quad();
  const LoadCableState x = hover_state(cfg);
  const LoadCableState next = rk4_step(x, hover_input(cfg), cfg, 0.1);
  CHECK((next.raw() - x.raw()).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("rk4_step reproduces a pure cable rotation in closed form") {
  const auto cfg = quad();
  LoadCableState x = hover_state(cfg);
  ControlInput u = hover_input(cfg);
  const double w = 0.7;  // rad/s about x
  for (int i = 0; i < cfg.n; ++i) x.cable_rate(i) = Vec3d(w, 0, 0);

  const double dt = 1e-3;
  const int steps = 200;
  LoadCableState cur = x;
  for (int k = 0; k < steps; ++k) cur = rk4_step(cur, u, cfg, dt);

  const double angle = w * dt * steps;
  const Mat3d rot = quat_to_rotmat<double>(
      quat_from_axis_angle<double>(Vec3d::UnitX(), angle));
  for (int i = 0; i < cfg.n; ++i) {
    const Vec3d want = rot * Vec3d(0, 0, -1);
    CHECK((Vec3d(cur.cable_dir(i)) - want).norm() < 1e-9);  // O(dt^4) + renorm
  }
}

TEST_CASE("rk4_step shows fourth-order convergence under step halving") {
  const auto cfg = quad();
  const LoadCableState x0 = random_state(cfg, 0.8);
  const ControlInput u = random_input(cfg);
  const double t_end = 0.2;

  const auto integrate = [&](double dt) {
    LoadCableState x = x0;
    const int steps = static_cast<int>(std::round(t_end / dt));
    for (int k = 0; k < steps; ++k) x = rk4_step(x, u, cfg, dt);
    return x.raw();
  };

  const VecXd ref = integrate(1e-5);
  const double e1 = (integrate(0.02) - ref).norm();
  const double e2 = (integrate(0.01) - ref).norm();
  const double ratio = e1 / e2;
  CHECK(ratio > 13.0);
  CHECK(ratio < 19.0);
}

TEST_CASE("rk4_step renormalizes q and cable directions to 1e-9") {
  const auto cfg = quad();
  LoadCableState x = random_state(cfg, 1.5);
  const ControlInput u = random_input(cfg);
  for (int k = 0; k < 50; ++k) {
    x = rk4_step(x, u, cfg, 0.01);
    CHECK(std::abs(Quatd(x.quaternion()).norm() - 1.0) < 1e-9);
    for (int i = 0; i < cfg.n; ++i) {
      CHECK(std::abs(Vec3d(x.cable_dir(i)).norm() - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("rk4_step flags non-finite states") {
  const auto cfg = quad();
  LoadCableState x = hover_state(cfg);
  x.velocity()(0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(rk4_step(x, hover_input(cfg), cfg, 0.1), IntegrationFailure);
  CHECK_THROWS_AS(rk4_step(hover_state(cfg), hover_input(cfg), cfg, 0.0),
                  InvalidArgument);
}

TEST_CASE("analytic dynamics jacobians match central finite differences") {
  const auto cfg = quad();
  const int nx = LoadCableState::dim(cfg.n);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const LoadCableState x = random_state(cfg);
    const ControlInput u = random_input(cfg);
    const auto jac = dynamics_jacobian(x, u, cfg);

    const auto f_of_x = [&](const VecXd& raw) {
      return dynamics(LoadCableState::from_raw(raw), u, cfg);
    };
    const auto f_of_u = [&](const VecXd& raw) {
      return dynamics(x, ControlInput::from_raw(raw), cfg);
    };
    worst = std::max(worst, rel_err(jac.A, fd_jacobian(f_of_x, x.raw())));
    worst = std::max(worst, rel_err(jac.B, fd_jacobian(f_of_u, u.raw())));
    (void)nx;
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("rk4 sensitivities match finite differences of the step map") {
  const auto cfg = quad();
  const double dt = 0.1;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const LoadCableState x = random_state(cfg);
    const ControlInput u = random_input(cfg);
    const auto sens = rk4_sensitivity(x, u, cfg, dt);

    const auto f_of_x = [&](const VecXd& raw) {
      return rk4_step(LoadCableState::from_raw(raw), u, cfg, dt).raw();
    };
    const auto f_of_u = [&](const VecXd& raw) {
      return rk4_step(x, ControlInput::from_raw(raw), cfg, dt).raw();
    };
    worst = std::max(worst, rel_err(sens.A, fd_jacobian(f_of_x, x.raw())));
    worst = std::max(worst, rel_err(sens.B, fd_jacobian(f_of_u, u.raw())));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("internal cable forces cancel in the combined system") {
  // m vdot + sum_i m_i a_i must equal sum_i f_i z_i + (m + sum m_i) g on any
  // taut configuration.
  const auto cfg = quad();
  for (int trial = 0; trial < 20; ++trial) {
    const LoadCableState x = random_state(cfg);
    const ControlInput u = random_input(cfg);
    const VecXd x_dot = dynamics(x, u, cfg);

    Vec3d momentum_rate = cfg.load_mass * Vec3d(x_dot.segment<3>(3));
    Vec3d external = (cfg.load_mass + cfg.uav_mass.sum()) * cfg.gravity;
    for (int i = 0; i < cfg.n; ++i) {
      momentum_rate += cfg.uav_mass(i) * uav_acceleration(x, x_dot, i, cfg);
      external += thrust_vector(x, u, x_dot, i, cfg).force;
    }
    CHECK((momentum_rate - external).norm() < 1e-8);
  }
}
