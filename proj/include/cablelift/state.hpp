#pragma once

#include <Eigen/Core>

#include "cablelift/geometry.hpp"
#include "cablelift/types.hpp"

namespace cablelift {

/// NMPC state vector for the load-cable system, stored flat:
///   [p(3), v(3), q(4), omega_L(3), s_1(3), r_1(3), r_dot_1(3), ...].
/// Dimension 13 + 9n. Named accessors are views into the flat storage.
class LoadCableState {
 public:
  static constexpr int kLoadDim = 13;
  static constexpr int kCableDim = 9;

  static int dim(int n_uav) { return kLoadDim + kCableDim * n_uav; }

  /// Rest state: q identity, cables hanging straight down, all rates zero.
  explicit LoadCableState(int n_uav)
      : n_(n_uav), raw_(VecXd::Zero(dim(n_uav))) {
    if (n_uav < 1) throw InvalidArgument("LoadCableState: need n >= 1");
    raw_(6) = 1.0;
    for (int i = 0; i < n_; ++i) raw_(13 + kCableDim * i + 2) = -1.0;
  }

  static LoadCableState from_raw(VecXd raw) {
    const int n = static_cast<int>((raw.size() - kLoadDim) / kCableDim);
    if (n < 1 || dim(n) != raw.size()) {
      throw InvalidArgument("LoadCableState: raw vector has invalid size");
    }
    LoadCableState x(n);
    x.raw_ = std::move(raw);
    return x;
  }

  int n_uav() const { return n_; }
  int size() const { return static_cast<int>(raw_.size()); }

  const VecXd& raw() const { return raw_; }
  VecXd& raw() { return raw_; }

  auto position() { return raw_.segment<3>(0); }
  auto position() const { return raw_.segment<3>(0); }
  auto velocity() { return raw_.segment<3>(3); }
  auto velocity() const { return raw_.segment<3>(3); }
  auto quaternion() { return raw_.segment<4>(6); }
  auto quaternion() const { return raw_.segment<4>(6); }
  auto angular_velocity() { return raw_.segment<3>(10); }
  auto angular_velocity() const { return raw_.segment<3>(10); }

  auto cable_dir(int i) { return raw_.segment<3>(cable_offset(i)); }
  auto cable_dir(int i) const { return raw_.segment<3>(cable_offset(i)); }
  auto cable_rate(int i) { return raw_.segment<3>(cable_offset(i) + 3); }
  auto cable_rate(int i) const { return raw_.segment<3>(cable_offset(i) + 3); }
  auto cable_rate_dot(int i) { return raw_.segment<3>(cable_offset(i) + 6); }
  auto cable_rate_dot(int i) const { return raw_.segment<3>(cable_offset(i) + 6); }

  Quatd quat() const { return Quatd(raw_.segment<4>(6)); }

  /// Rotation matrix of the (near-unit) attitude quaternion, evaluated as a
  /// polynomial in the raw coefficients.
  Mat3d rotation() const { return rotmat_poly<double>(quat()); }

  int cable_offset(int i) const {
    check_index(i);
    return kLoadDim + kCableDim * i;
  }

  /// Unit-norm and finiteness invariants (tol per the type contract).
  void validate(double tol = 1e-6) const {
    if (!raw_.allFinite()) throw InvalidArgument("LoadCableState: non-finite entry");
    if (std::abs(quaternion().norm() - 1.0) > tol) {
      throw InvalidArgument("LoadCableState: quaternion norm deviates from 1");
    }
    for (int i = 0; i < n_; ++i) {
      if (std::abs(cable_dir(i).norm() - 1.0) > tol) {
        throw InvalidArgument("LoadCableState: cable direction norm deviates from 1");
      }
    }
  }

  void renormalize() {
    raw_.segment<4>(6).normalize();
    for (int i = 0; i < n_; ++i) raw_.segment<3>(cable_offset(i)).normalize();
  }

  friend bool operator==(const LoadCableState& a, const LoadCableState& b) {
    return a.n_ == b.n_ && (a.raw_.array() == b.raw_.array()).all();
  }

 private:
  void check_index(int i) const {
    if (i < 0 || i >= n_) throw InvalidArgument("LoadCableState: cable index out of range");
  }

  int n_;
  VecXd raw_;
};

/// NMPC input vector, stored flat: [c_1(3), t_1, c_2(3), t_2, ...].
/// Dimension 4n.
class ControlInput {
 public:
  static constexpr int kPerCable = 4;

  static int dim(int n_uav) { return kPerCable * n_uav; }

  explicit ControlInput(int n_uav) : n_(n_uav), raw_(VecXd::Zero(dim(n_uav))) {
    if (n_uav < 1) throw InvalidArgument("ControlInput: need n >= 1");
  }

  static ControlInput from_raw(VecXd raw) {
    const int n = static_cast<int>(raw.size() / kPerCable);
    if (n < 1 || dim(n) != raw.size()) {
      throw InvalidArgument("ControlInput: raw vector has invalid size");
    }
    ControlInput u(n);
    u.raw_ = std::move(raw);
    return u;
  }

  int n_uav() const { return n_; }
  int size() const { return static_cast<int>(raw_.size()); }

  const VecXd& raw() const { return raw_; }
  VecXd& raw() { return raw_; }

  auto jerk(int i) { return raw_.segment<3>(jerk_offset(i)); }
  auto jerk(int i) const { return raw_.segment<3>(jerk_offset(i)); }
  double& tension(int i) { return raw_(tension_offset(i)); }
  double tension(int i) const { return raw_(tension_offset(i)); }

  int jerk_offset(int i) const {
    check_index(i);
    return kPerCable * i;
  }
  int tension_offset(int i) const {
    check_index(i);
    return kPerCable * i + 3;
  }

  friend bool operator==(const ControlInput& a, const ControlInput& b) {
    return a.n_ == b.n_ && (a.raw_.array() == b.raw_.array()).all();
  }

 private:
  void check_index(int i) const {
    if (i < 0 || i >= n_) throw InvalidArgument("ControlInput: cable index out of range");
  }

  int n_;
  VecXd raw_;
};

}  // namespace cablelift
