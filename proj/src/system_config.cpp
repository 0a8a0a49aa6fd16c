#include "cablelift/system_config.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

namespace cablelift {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidConfiguration(what);
}

}  // namespace

void ConstraintBounds::validate(int n) const {
  require(f_min.size() == n && f_max.size() == n && s_z_max.size() == n &&
              sigma_max.size() == n && t_min.size() == n && t_max.size() == n,
          "bounds: per-UAV arrays must have one entry per UAV");
  for (int i = 0; i < n; ++i) {
    require(f_min(i) >= 0.0, "bounds.f_min: must be >= 0");
    require(f_min(i) < f_max(i), "bounds.f_max: must exceed f_min");
    require(s_z_max(i) < 0.0, "bounds.s_z_max: must be < 0");
    require(sigma_max(i) < 0.0, "bounds.sigma_max: must be < 0");
    require(t_min(i) > 0.0, "bounds.t_min: must be > 0");
    require(t_min(i) < t_max(i), "bounds.t_max: must exceed t_min");
  }
  require(d_min > 0.0, "bounds.d_min: must be > 0");
  require(c_max > 0.0, "bounds.c_max: must be > 0");
}

void SystemConfig::validate() {
  require(n >= 1, "system.n: need at least one UAV");
  require(load_mass > 0.0, "system.load_mass: must be > 0");
  require(uav_mass.size() == n, "system.uav_mass: one entry per UAV");
  require(cable_length.size() == n, "system.cable_length: one entry per UAV");
  require(attachment.cols() == n, "system.attachment: one point per UAV");
  for (int i = 0; i < n; ++i) {
    require(uav_mass(i) > 0.0, "system.uav_mass: must be > 0");
    require(cable_length(i) > 0.0, "system.cable_length: must be > 0");
  }
  require(gravity.allFinite(), "system.gravity: must be finite");
  require((inertia - inertia.transpose()).lpNorm<Eigen::Infinity>() < 1e-9,
          "system.inertia: must be symmetric");
  Eigen::LLT<Mat3d> llt(inertia);
  require(llt.info() == Eigen::Success,
          "system.inertia: must be symmetric positive definite");
  inertia_inv = llt.solve(Mat3d::Identity());
  bounds.validate(n);
}

SystemConfig SystemConfig::demo_quad() {
  SystemConfig cfg;
  cfg.n = 4;
  cfg.load_mass = 4.0;
  cfg.inertia = Vec3d(0.5, 0.5, 0.9).asDiagonal();
  cfg.uav_mass = VecXd::Constant(4, 1.0);
  cfg.cable_length = VecXd::Constant(4, 4.0);
  cfg.attachment.resize(3, 4);
  cfg.attachment.col(0) = Vec3d(1, 0, 0);
  cfg.attachment.col(1) = Vec3d(0, 1, 0);
  cfg.attachment.col(2) = Vec3d(-1, 0, 0);
  cfg.attachment.col(3) = Vec3d(0, -1, 0);
  cfg.bounds = ConstraintBounds::defaults(4);
  cfg.validate();
  return cfg;
}

SystemConfig SystemConfig::regular_polygon(int n) {
  SystemConfig cfg;
  cfg.n = n;
  cfg.load_mass = static_cast<double>(n);
  cfg.inertia = Vec3d(0.5, 0.5, 0.9).asDiagonal();
  cfg.uav_mass = VecXd::Constant(n, 1.0);
  cfg.cable_length = VecXd::Constant(n, 4.0);
  cfg.attachment.resize(3, n);
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * M_PI * i / n;
    cfg.attachment.col(i) = Vec3d(std::cos(a), std::sin(a), 0.0);
  }
  cfg.bounds = ConstraintBounds::defaults(n);
  cfg.validate();
  return cfg;
}

}  // namespace cablelift
