#include "cablelift/model.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "cablelift/geometry.hpp"

namespace cablelift {

namespace {

constexpr int kP = 0, kV = 3, kQ = 6, kW = 10, kLoad = LoadCableState::kLoadDim;

int cable_base(int i) { return kLoad + LoadCableState::kCableDim * i; }

/// RHS on raw vectors; layout documented in model.hpp.
void rhs(const Eigen::Ref<const VecXd>& x, const Eigen::Ref<const VecXd>& u,
         const SystemConfig& cfg, VecXd& dx) {
  const int n = cfg.n;
  dx.resize(x.size());

  const Vec4d q = x.segment<4>(kQ);
  const Vec3d omega = x.segment<3>(kW);
  const Mat3d r_t = rotmat_poly<double>(q).transpose();

  // p' = v
  dx.segment<3>(kP) = x.segment<3>(kV);

  // v' and the torque accumulator share the tension loop.
  Vec3d force_sum = Vec3d::Zero();
  Vec3d torque = -omega.cross(cfg.inertia * omega);
  for (int i = 0; i < n; ++i) {
    const Vec3d s = x.segment<3>(cable_base(i));
    const double t = u(4 * i + 3);
    force_sum += t * s;
    torque += t * (r_t * s).cross(cfg.attachment.col(i));
  }
  dx.segment<3>(kV) = -force_sum / cfg.load_mass + cfg.gravity;

  // q' = 1/2 q ⊗ [0, omega]
  Quatd omega_quat;
  omega_quat << 0.0, omega;
  dx.segment<4>(kQ) = 0.5 * quat_multiply<double>(q, omega_quat);

  dx.segment<3>(kW) = cfg.inertia_inv * torque;

  for (int i = 0; i < n; ++i) {
    const int b = cable_base(i);
    const Vec3d s = x.segment<3>(b);
    const Vec3d rate = x.segment<3>(b + 3);
    dx.segment<3>(b) = rate.cross(s);
    dx.segment<3>(b + 3) = x.segment<3>(b + 6);
    dx.segment<3>(b + 6) = u.segment<3>(4 * i);
  }
}

void fill_jacobian(const Eigen::Ref<const VecXd>& x, const Eigen::Ref<const VecXd>& u,
                   const SystemConfig& cfg, MatXd& a, MatXd& b) {
  const int n = cfg.n;
  const int nx = static_cast<int>(x.size());
  const int nu = static_cast<int>(u.size());
  a.setZero(nx, nx);
  b.setZero(nx, nu);

  const Vec4d q = x.segment<4>(kQ);
  const Vec3d omega = x.segment<3>(kW);
  const Mat3d r_t = rotmat_poly<double>(q).transpose();

  a.block<3, 3>(kP, kV).setIdentity();

  // q' rows: 1/2 Qbar([0,omega]) in the q columns, last three columns of
  // 1/2 Q(q) in the omega columns.
  Quatd omega_quat;
  omega_quat << 0.0, omega;
  a.block<4, 4>(kQ, kQ) = 0.5 * quat_right_product_matrix<double>(omega_quat);
  a.block<4, 3>(kQ, kW) = 0.5 * quat_product_matrix<double>(q).rightCols<3>();

  // omega' rows, state-independent pieces.
  a.block<3, 3>(kW, kW) =
      cfg.inertia_inv * (-hat<double>(omega) * cfg.inertia + hat<double>(cfg.inertia * omega));

  Eigen::Matrix<double, 3, 4> dwdq = Eigen::Matrix<double, 3, 4>::Zero();
  for (int i = 0; i < n; ++i) {
    const int sb = cable_base(i);
    const Vec3d s = x.segment<3>(sb);
    const double t = u(4 * i + 3);
    const Vec3d rho = cfg.attachment.col(i);
    const Mat3d rho_hat = hat<double>(rho);

    a.block<3, 3>(kV, sb) = -(t / cfg.load_mass) * Mat3d::Identity();
    b.block<3, 1>(kV, 4 * i + 3) = -s / cfg.load_mass;

    dwdq += t * (-rho_hat) * rotate_transpose_jacobian_q<double>(q, s);
    a.block<3, 3>(kW, sb) = cfg.inertia_inv * t * (-rho_hat) * r_t;
    b.block<3, 1>(kW, 4 * i + 3) = cfg.inertia_inv * (r_t * s).cross(rho);

    const Vec3d rate = x.segment<3>(sb + 3);
    a.block<3, 3>(sb, sb) = hat<double>(rate);
    a.block<3, 3>(sb, sb + 3) = -hat<double>(s);
    a.block<3, 3>(sb + 3, sb + 6).setIdentity();
    b.block<3, 3>(sb + 6, 4 * i).setIdentity();
  }
  a.block<3, 4>(kW, kQ) = cfg.inertia_inv * dwdq;
}

}  // namespace

VecXd dynamics(const LoadCableState& x, const ControlInput& u, const SystemConfig& cfg) {
  if (x.n_uav() != cfg.n || u.n_uav() != cfg.n) {
    throw InvalidArgument("dynamics: state/input size does not match config");
  }
  VecXd dx;
  rhs(x.raw(), u.raw(), cfg, dx);
  return dx;
}

LoadCableState rk4_step(const LoadCableState& x, const ControlInput& u,
                        const SystemConfig& cfg, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("rk4_step: dt must be > 0");
  if (x.n_uav() != cfg.n || u.n_uav() != cfg.n) {
    throw InvalidArgument("rk4_step: state/input size does not match config");
  }
  const VecXd& x0 = x.raw();
  VecXd k1, k2, k3, k4;
  rhs(x0, u.raw(), cfg, k1);
  rhs(x0 + 0.5 * dt * k1, u.raw(), cfg, k2);
  rhs(x0 + 0.5 * dt * k2, u.raw(), cfg, k3);
  rhs(x0 + dt * k3, u.raw(), cfg, k4);

  VecXd next = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) {
    throw IntegrationFailure("rk4_step: non-finite state after step", x0);
  }
  LoadCableState out = LoadCableState::from_raw(std::move(next));
  out.renormalize();
  return out;
}

ContinuousJacobian dynamics_jacobian(const LoadCableState& x, const ControlInput& u,
                                     const SystemConfig& cfg) {
  ContinuousJacobian j;
  fill_jacobian(x.raw(), u.raw(), cfg, j.A, j.B);
  return j;
}

StepWithSensitivity rk4_step_with_sensitivity(const LoadCableState& x,
                                              const ControlInput& u,
                                              const SystemConfig& cfg, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("rk4_step_with_sensitivity: dt must be > 0");
  const int nx = x.size();
  const int nu = u.size();
  const int nz = nx + nu;
  const VecXd& x0 = x.raw();
  const VecXd& u0 = u.raw();

  // S_j = d x_stage_j / d (x,u); K_j = d k_j / d (x,u) = A_j S_j + [0 B_j].
  MatXd a_j, b_j;
  VecXd k1, k2, k3, k4;
  MatXd kj1(nx, nz), kj2(nx, nz), kj3(nx, nz), kj4(nx, nz), s(nx, nz);

  auto stage = [&](const VecXd& xs, VecXd& k, MatXd& kj) {
    rhs(xs, u0, cfg, k);
    fill_jacobian(xs, u0, cfg, a_j, b_j);
    kj.leftCols(nx).noalias() = a_j * s.leftCols(nx);
    kj.rightCols(nu).noalias() = a_j * s.rightCols(nu);
    kj.rightCols(nu) += b_j;
  };

  s.setZero();
  s.leftCols(nx).setIdentity();
  stage(x0, k1, kj1);

  s.setZero();
  s.leftCols(nx).setIdentity();
  s += 0.5 * dt * kj1;
  stage(x0 + 0.5 * dt * k1, k2, kj2);

  s.setZero();
  s.leftCols(nx).setIdentity();
  s += 0.5 * dt * kj2;
  stage(x0 + 0.5 * dt * k2, k3, kj3);

  s.setZero();
  s.leftCols(nx).setIdentity();
  s += dt * kj3;
  stage(x0 + dt * k3, k4, kj4);

  VecXd next_raw = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next_raw.allFinite()) {
    throw IntegrationFailure("rk4_step_with_sensitivity: non-finite state after step", x0);
  }

  MatXd phi(nx, nz);
  phi.setZero();
  phi.leftCols(nx).setIdentity();
  phi += (dt / 6.0) * (kj1 + 2.0 * kj2 + 2.0 * kj3 + kj4);

  // Renormalization of q and the s_i blocks is part of the step map; fold its
  // Jacobian into the corresponding rows.
  phi.middleRows<4>(kQ) =
      normalize_jacobian(next_raw.segment<4>(kQ).eval()) * phi.middleRows<4>(kQ);
  for (int i = 0; i < cfg.n; ++i) {
    const int b = cable_base(i);
    phi.middleRows<3>(b) =
        normalize_jacobian(next_raw.segment<3>(b).eval()) * phi.middleRows<3>(b);
  }

  StepWithSensitivity out{LoadCableState::from_raw(std::move(next_raw)), {}};
  out.next.renormalize();
  out.sens.A = phi.leftCols(nx);
  out.sens.B = phi.rightCols(nu);
  return out;
}

}  // namespace cablelift
