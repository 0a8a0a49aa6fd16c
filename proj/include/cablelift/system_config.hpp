#pragma once

#include <Eigen/Core>
#include <Eigen/Cholesky>

#include "cablelift/types.hpp"

namespace cablelift {

/// Bounds for the inequality path constraints. Per-UAV quantities are stored
/// one entry per UAV.
struct ConstraintBounds {
  VecXd f_min;      ///< collective thrust lower bound (N)
  VecXd f_max;      ///< collective thrust upper bound (N)
  double d_min = 1.0;  ///< minimum UAV-to-cable distance (m)
  VecXd s_z_max;    ///< cable-above-load bound, < 0 (dimensionless)
  VecXd sigma_max;  ///< cable-under-UAV bound, < 0 (N)
  VecXd t_min;      ///< tension lower bound (N)
  VecXd t_max;      ///< tension upper bound (N)
  double c_max = 50.0;  ///< soft box on cable angular jerk components (rad/s^3)

  static ConstraintBounds defaults(int n) {
    ConstraintBounds b;
    b.f_min = VecXd::Constant(n, 1.0);
    b.f_max = VecXd::Constant(n, 20.0);
    b.d_min = 1.0;
    b.s_z_max = VecXd::Constant(n, -0.3);
    b.sigma_max = VecXd::Constant(n, -10.0);
    b.t_min = VecXd::Constant(n, 5.0);
    b.t_max = VecXd::Constant(n, 15.0);
    b.c_max = 50.0;
    return b;
  }

  void validate(int n) const;
};

/// Which cable direction spans the line in the UAV-to-cable distance.
/// CableLine is the point-to-line reading (uses s_j); PaperOwnDirection uses
/// s_i in both places for literal reproduction of the printed formula.
enum class DistanceVariant { CableLine, PaperOwnDirection };

/// Physical parameters of the load-cable system. Immutable after validate();
/// shareable across threads.
struct SystemConfig {
  int n = 0;                   ///< number of UAVs
  double load_mass = 0.0;      ///< kg
  Mat3d inertia = Mat3d::Zero();  ///< load inertia in the load frame (kg m^2)
  VecXd uav_mass;              ///< kg, size n
  VecXd cable_length;          ///< m, size n
  Eigen::Matrix3Xd attachment;  ///< rho_i^L columns, load frame (m)
  Vec3d gravity{0.0, 0.0, -9.81};  ///< m/s^2, world z up
  ConstraintBounds bounds;
  DistanceVariant distance_variant = DistanceVariant::CableLine;

  Mat3d inertia_inv = Mat3d::Zero();  ///< cached by validate()

  /// Checks invariants, caches the inertia inverse.
  /// Throws InvalidConfiguration (singular or non-SPD inertia included).
  void validate();

  /// The 4-UAV demo system: 4 kg load, 1 kg UAVs, 4 m cables,
  /// attachments at 1 m radius every 90 degrees.
  static SystemConfig demo_quad();

  /// Regular-polygon layout for n UAVs at 1 m radius, 1 kg UAVs, 4 m cables,
  /// load mass n kg so the per-UAV share stays nominal.
  static SystemConfig regular_polygon(int n);
};

}  // namespace cablelift
