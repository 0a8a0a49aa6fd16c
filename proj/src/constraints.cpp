#include "cablelift/constraints.hpp"

#include <cmath>
#include <limits>

#include "cablelift/geometry.hpp"
#include "cablelift/model.hpp"

namespace cablelift {

namespace {

constexpr int kV = 3, kQ = 6, kW = 10;

int cable_base(int i) { return LoadCableState::kLoadDim + LoadCableState::kCableDim * i; }

double quiet_nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

const char* family_name(ConstraintFamily f) {
  switch (f) {
    case ConstraintFamily::Thrust: return "thrust";
    case ConstraintFamily::Tension: return "tension";
    case ConstraintFamily::CableLoad: return "cable_load";
    case ConstraintFamily::CableUav: return "cable_uav";
    case ConstraintFamily::Distance: return "dist";
    case ConstraintFamily::InputBox: return "input_box";
  }
  return "?";
}

ThrustMargins thrust_constraint(const LoadCableState& x, const ControlInput& u,
                                const VecXd& x_dot, int i, const SystemConfig& cfg) {
  const ThrustVector tv = thrust_vector(x, u, x_dot, i, cfg);
  ThrustMargins m;
  m.thrust = tv.magnitude;
  m.margin_low = tv.magnitude - cfg.bounds.f_min(i);
  m.margin_high = cfg.bounds.f_max(i) - tv.magnitude;
  return m;
}

double uav_cable_distance(const LoadCableState& x, int i, int j, const SystemConfig& cfg) {
  if (i == j) throw InvalidArgument("uav_cable_distance: need i != j");
  const Vec3d p_i = uav_position(x, i, cfg);
  const Vec3d p_j = uav_position(x, j, cfg);
  const Vec3d dir = cfg.distance_variant == DistanceVariant::CableLine
                        ? Vec3d(x.cable_dir(j))
                        : Vec3d(x.cable_dir(i));
  return (p_i - p_j).cross(dir).norm();
}

double cable_load_clearance(const LoadCableState& x, int i) {
  return (x.rotation().transpose() * Vec3d(x.cable_dir(i))).z();
}

double cable_uav_clearance(const LoadCableState& x, const ControlInput& u,
                           const VecXd& x_dot, int i, const SystemConfig& cfg) {
  const ThrustVector tv = thrust_vector(x, u, x_dot, i, cfg);
  return tv.force.dot(Vec3d(x.cable_dir(i)));
}

TensionMargins tension_constraint(const ControlInput& u, int i, const SystemConfig& cfg) {
  TensionMargins m;
  m.tension = u.tension(i);
  m.margin_low = m.tension - cfg.bounds.t_min(i);
  m.margin_high = cfg.bounds.t_max(i) - m.tension;
  return m;
}

ConstraintReport evaluate_all(const LoadCableState& x, const ControlInput& u,
                              const SystemConfig& cfg) {
  ConstraintReport rep;
  const int n = cfg.n;
  rep.rows.reserve(4 * n + n * (n - 1));
  const VecXd x_dot = dynamics(x, u, cfg);

  for (int i = 0; i < n; ++i) {
    ConstraintRow row;
    row.label = "thrust[" + std::to_string(i) + "]";
    try {
      const ThrustMargins m = thrust_constraint(x, u, x_dot, i, cfg);
      row.value = m.thrust;
      if (m.margin_low <= m.margin_high) {
        row.bound = cfg.bounds.f_min(i);
        row.margin = m.margin_low;
      } else {
        row.bound = cfg.bounds.f_max(i);
        row.margin = m.margin_high;
      }
      row.satisfied = row.margin >= 0.0;
    } catch (const Error&) {
      row.value = quiet_nan();
      row.bound = cfg.bounds.f_min(i);
      row.margin = quiet_nan();
      row.satisfied = false;
    }
    rep.rows.push_back(std::move(row));
  }

  for (int i = 0; i < n; ++i) {
    const TensionMargins m = tension_constraint(u, i, cfg);
    ConstraintRow row;
    row.label = "tension[" + std::to_string(i) + "]";
    row.value = m.tension;
    if (m.margin_low <= m.margin_high) {
      row.bound = cfg.bounds.t_min(i);
      row.margin = m.margin_low;
    } else {
      row.bound = cfg.bounds.t_max(i);
      row.margin = m.margin_high;
    }
    row.satisfied = row.margin >= 0.0;
    rep.rows.push_back(std::move(row));
  }

  for (int i = 0; i < n; ++i) {
    ConstraintRow row;
    row.label = "cable_load[" + std::to_string(i) + "]";
    row.value = cable_load_clearance(x, i);
    row.bound = cfg.bounds.s_z_max(i);
    row.margin = row.bound - row.value;
    row.satisfied = row.margin >= 0.0;
    rep.rows.push_back(std::move(row));
  }

  for (int i = 0; i < n; ++i) {
    ConstraintRow row;
    row.label = "cable_uav[" + std::to_string(i) + "]";
    row.bound = cfg.bounds.sigma_max(i);
    try {
      row.value = cable_uav_clearance(x, u, x_dot, i, cfg);
      row.margin = row.bound - row.value;
      row.satisfied = row.margin >= 0.0;
    } catch (const Error&) {
      row.value = quiet_nan();
      row.margin = quiet_nan();
      row.satisfied = false;
    }
    rep.rows.push_back(std::move(row));
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      ConstraintRow row;
      row.label = "dist[" + std::to_string(i) + "," + std::to_string(j) + "]";
      row.value = uav_cable_distance(x, i, j, cfg);
      row.bound = cfg.bounds.d_min;
      row.margin = row.value - row.bound;
      row.satisfied = row.margin >= 0.0;
      rep.rows.push_back(std::move(row));
    }
  }
  return rep;
}

namespace {

/// Shared per-(x,u) context for the gradient path.
struct MarginContext {
  int nx = 0, nu = 0, nz = 0;
  VecXd x_dot;
  ContinuousJacobian jac;  // rows kV, kW used by the thrust chain
  Mat3d rot;
  bool with_input = false;
};

/// d F_i / d [x; u] for F_i = m_i (a_i - g) - t_i s_i, 3 x nz.
MatXd thrust_force_jacobian(const LoadCableState& x, const ControlInput& u,
                            const MarginContext& ctx, int i, const SystemConfig& cfg) {
  const int nx = ctx.nx;
  const Vec3d rho = cfg.attachment.col(i);
  const Vec3d s = x.cable_dir(i);
  const Vec3d r = x.cable_rate(i);
  const Vec3d rd = x.cable_rate_dot(i);
  const Vec3d omega = x.angular_velocity();
  const Vec3d w_dot = ctx.x_dot.segment<3>(kW);
  const double l = cfg.cable_length(i);
  const double m_i = cfg.uav_mass(i);
  const Quatd q = x.quat();

  // Total derivative of a_i: rows of [A B] give d(vdot), d(wdot).
  MatXd da(3, ctx.nz);
  da.leftCols(nx) = ctx.jac.A.middleRows<3>(kV);
  da.rightCols(ctx.nu) = ctx.jac.B.middleRows<3>(kV);

  const Vec3d h = w_dot.cross(rho) + omega.cross(omega.cross(rho));
  MatXd dh(3, ctx.nz);
  dh.leftCols(nx) = -hat<double>(rho) * ctx.jac.A.middleRows<3>(kW);
  dh.rightCols(ctx.nu) = -hat<double>(rho) * ctx.jac.B.middleRows<3>(kW);
  dh.block<3, 3>(0, kW) += -hat<double>(omega.cross(rho)) - hat<double>(omega) * hat<double>(rho);

  da += ctx.rot * dh;
  da.block<3, 4>(0, kQ) += rotate_jacobian_q<double>(q, h);

  const int sb = cable_base(i);
  // -l (rd x s): d/drd = l hat(s), d/ds = -l hat(rd)
  da.block<3, 3>(0, sb + 6) += l * hat<double>(s);
  da.block<3, 3>(0, sb) += -l * hat<double>(rd);
  // -l r x (r x s): d/dr = l (hat(r x s) + hat(r) hat(s)), d/ds = -l hat(r) hat(r)
  da.block<3, 3>(0, sb + 3) += l * (hat<double>(r.cross(s)) + hat<double>(r) * hat<double>(s));
  da.block<3, 3>(0, sb) += -l * hat<double>(r) * hat<double>(r);

  MatXd df = m_i * da;
  df.block<3, 3>(0, sb) -= u.tension(i) * Mat3d::Identity();
  df.block<3, 1>(0, nx + 4 * i + 3) -= s;
  return df;
}

void push(std::vector<StageMargin>& out, ConstraintFamily fam, double value, VecXd grad) {
  StageMargin m;
  m.family = fam;
  m.value = value;
  m.grad = std::move(grad);
  out.push_back(std::move(m));
}

}  // namespace

ConstraintFamily stage_margin_family(int n, int index, bool terminal) {
  if (terminal) {
    if (index < n) return ConstraintFamily::CableLoad;
    return ConstraintFamily::Distance;
  }
  if (index < 2 * n) return ConstraintFamily::Thrust;
  index -= 2 * n;
  if (index < 2 * n) return ConstraintFamily::Tension;
  index -= 2 * n;
  if (index < n) return ConstraintFamily::CableLoad;
  index -= n;
  if (index < n) return ConstraintFamily::CableUav;
  index -= n;
  if (index < n * (n - 1)) return ConstraintFamily::Distance;
  return ConstraintFamily::InputBox;
}

std::vector<StageMargin> stage_margins(const LoadCableState& x, const ControlInput* u,
                                       const SystemConfig& cfg, bool with_gradients) {
  const int n = cfg.n;
  const int nx = x.size();
  const int nu = u ? u->size() : 0;
  const int nz = nx + nu;
  std::vector<StageMargin> out;
  const VecXd empty;

  MarginContext ctx;
  ctx.nx = nx;
  ctx.nu = nu;
  ctx.nz = nz;
  ctx.rot = x.rotation();
  ctx.with_input = u != nullptr;
  if (u) {
    ctx.x_dot = dynamics(x, *u, cfg);
    if (with_gradients) ctx.jac = dynamics_jacobian(x, *u, cfg);
  }

  if (u) {
    for (int i = 0; i < n; ++i) {
      // Thrust magnitude margins; degenerate force gets a violated margin
      // with no direction information.
      const Vec3d a = uav_acceleration(x, ctx.x_dot, i, cfg);
      const Vec3d force = cfg.uav_mass(i) * (a - cfg.gravity) -
                          u->tension(i) * Vec3d(x.cable_dir(i));
      const double f = force.norm();
      VecXd glo = empty, ghi = empty;
      if (with_gradients) {
        glo = VecXd::Zero(nz);
        ghi = VecXd::Zero(nz);
        if (f > 1e-9) {
          const MatXd df = thrust_force_jacobian(x, *u, ctx, i, cfg);
          glo = (force / f).transpose() * df;
          ghi = -glo;
        }
      }
      push(out, ConstraintFamily::Thrust, f - cfg.bounds.f_min(i), std::move(glo));
      push(out, ConstraintFamily::Thrust, cfg.bounds.f_max(i) - f, std::move(ghi));
    }

    for (int i = 0; i < n; ++i) {
      const double t = u->tension(i);
      VecXd glo = empty, ghi = empty;
      if (with_gradients) {
        glo = VecXd::Zero(nz);
        ghi = VecXd::Zero(nz);
        glo(nx + 4 * i + 3) = 1.0;
        ghi(nx + 4 * i + 3) = -1.0;
      }
      push(out, ConstraintFamily::Tension, t - cfg.bounds.t_min(i), std::move(glo));
      push(out, ConstraintFamily::Tension, cfg.bounds.t_max(i) - t, std::move(ghi));
    }
  }

  const Quatd q = x.quat();
  for (int i = 0; i < n; ++i) {
    const Vec3d s = x.cable_dir(i);
    const double val = (ctx.rot.transpose() * s).z();
    VecXd g = empty;
    if (with_gradients) {
      g = VecXd::Zero(nz);
      // margin = s_z_max - (R^T s)_z
      g.segment<4>(kQ) = -rotate_transpose_jacobian_q<double>(q, s).row(2);
      g.segment<3>(cable_base(i)) = -ctx.rot.col(2);  // row 2 of R^T
    }
    push(out, ConstraintFamily::CableLoad, cfg.bounds.s_z_max(i) - val, std::move(g));
  }

  if (u) {
    for (int i = 0; i < n; ++i) {
      const Vec3d a = uav_acceleration(x, ctx.x_dot, i, cfg);
      const Vec3d s = x.cable_dir(i);
      const Vec3d force = cfg.uav_mass(i) * (a - cfg.gravity) - u->tension(i) * s;
      const double sigma = force.dot(s);
      VecXd g = empty;
      if (with_gradients) {
        const MatXd df = thrust_force_jacobian(x, *u, ctx, i, cfg);
        g = -(s.transpose() * df).transpose();
        g.segment<3>(cable_base(i)) -= force;
      }
      push(out, ConstraintFamily::CableUav, cfg.bounds.sigma_max(i) - sigma, std::move(g));
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const Vec3d rho_diff = cfg.attachment.col(i) - cfg.attachment.col(j);
      const Vec3d s_i = x.cable_dir(i);
      const Vec3d s_j = x.cable_dir(j);
      const Vec3d a = ctx.rot * rho_diff + cfg.cable_length(j) * s_j -
                      cfg.cable_length(i) * s_i;
      const bool own = cfg.distance_variant == DistanceVariant::PaperOwnDirection;
      const Vec3d dir = own ? s_i : s_j;
      const Vec3d w = a.cross(dir);
      const double d = w.norm();
      VecXd g = empty;
      if (with_gradients) {
        g = VecXd::Zero(nz);
        if (d > 1e-12) {
          const Vec3d wn = w / d;
          const Mat3d dw_da = -hat<double>(dir);
          Eigen::Matrix<double, 1, 3> gw = wn.transpose() * dw_da;
          g.segment<4>(kQ) = (gw * rotate_jacobian_q<double>(q, rho_diff)).transpose();
          g.segment<3>(cable_base(i)) = -cfg.cable_length(i) * gw.transpose();
          g.segment<3>(cable_base(j)) += cfg.cable_length(j) * gw.transpose();
          const auto explicit_dir = (wn.transpose() * hat<double>(a)).transpose();
          g.segment<3>(cable_base(own ? i : j)) += explicit_dir;
        }
      }
      push(out, ConstraintFamily::Distance, d - cfg.bounds.d_min, std::move(g));
    }
  }

  if (u) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < 3; ++k) {
        const double c = u->jerk(i)(k);
        VecXd glo = empty, ghi = empty;
        if (with_gradients) {
          glo = VecXd::Zero(nz);
          ghi = VecXd::Zero(nz);
          glo(nx + 4 * i + k) = 1.0;
          ghi(nx + 4 * i + k) = -1.0;
        }
        push(out, ConstraintFamily::InputBox, c + cfg.bounds.c_max, std::move(glo));
        push(out, ConstraintFamily::InputBox, cfg.bounds.c_max - c, std::move(ghi));
      }
    }
  }

  return out;
}

}  // namespace cablelift
