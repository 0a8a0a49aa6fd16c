#pragma once

#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include "cablelift/types.hpp"

namespace cablelift {

template <typename Scalar>
Mat3<Scalar> hat(const Vec3<Scalar>& v) {
  Mat3<Scalar> m;
  m << Scalar(0), -v.z(), v.y(),
       v.z(), Scalar(0), -v.x(),
       -v.y(), v.x(), Scalar(0);
  return m;
}

/// Left multiplication matrix Q(q): q1 ⊗ q2 = Q(q1) q2.
template <typename Scalar>
Mat4<Scalar> quat_product_matrix(const Quat<Scalar>& q) {
  if (!q.allFinite()) {
    throw InvalidArgument("quat_product_matrix: non-finite quaternion");
  }
  const Scalar w = q(0), x = q(1), y = q(2), z = q(3);
  Mat4<Scalar> m;
  m << w, -x, -y, -z,
       x, w, -z, y,
       y, z, w, -x,
       z, -y, x, w;
  return m;
}

/// Right multiplication matrix: q1 ⊗ q2 = quat_right_product_matrix(q2) q1.
template <typename Scalar>
Mat4<Scalar> quat_right_product_matrix(const Quat<Scalar>& q) {
  if (!q.allFinite()) {
    throw InvalidArgument("quat_right_product_matrix: non-finite quaternion");
  }
  const Scalar w = q(0), x = q(1), y = q(2), z = q(3);
  Mat4<Scalar> m;
  m << w, -x, -y, -z,
       x, w, z, -y,
       y, -z, w, x,
       z, y, -x, w;
  return m;
}

template <typename Scalar>
Quat<Scalar> quat_multiply(const Quat<Scalar>& a, const Quat<Scalar>& b) {
  const Scalar w = a(0) * b(0) - a.template tail<3>().dot(b.template tail<3>());
  const Vec3<Scalar> v = a(0) * b.template tail<3>() + b(0) * a.template tail<3>() +
                         a.template tail<3>().cross(b.template tail<3>());
  return Quat<Scalar>(w, v.x(), v.y(), v.z());
}

template <typename Scalar>
Quat<Scalar> quat_conjugate(const Quat<Scalar>& q) {
  return Quat<Scalar>(q(0), -q(1), -q(2), -q(3));
}

template <typename Scalar>
Quat<Scalar> quat_normalized(const Quat<Scalar>& q) {
  const Scalar n = q.norm();
  if (!(n > Scalar(1e-12))) {
    throw InvalidArgument("quat_normalized: zero quaternion");
  }
  return q / n;
}

template <typename Scalar>
Quat<Scalar> quat_identity() {
  return Quat<Scalar>(Scalar(1), Scalar(0), Scalar(0), Scalar(0));
}

template <typename Scalar>
Quat<Scalar> quat_from_axis_angle(const Vec3<Scalar>& axis, Scalar angle) {
  const Scalar n = axis.norm();
  if (!(n > Scalar(0))) {
    throw InvalidArgument("quat_from_axis_angle: zero axis");
  }
  const Vec3<Scalar> u = axis / n;
  const Scalar half = angle / Scalar(2);
  Quat<Scalar> q;
  q(0) = std::cos(half);
  q.template tail<3>() = std::sin(half) * u;
  return q;
}

/// Flip q onto the hemisphere of ref, so <q, ref> >= 0.
template <typename Scalar>
Quat<Scalar> align_hemisphere(const Quat<Scalar>& q, const Quat<Scalar>& ref) {
  return q.dot(ref) < Scalar(0) ? Quat<Scalar>(-q) : q;
}

/// Rotation matrix as a polynomial in q, no renormalization. Equals the
/// rotation of q when |q| = 1; used by the model paths so that dynamics and
/// constraint evaluations stay polynomial in the raw state and their analytic
/// Jacobians are exact everywhere.
template <typename Scalar>
Mat3<Scalar> rotmat_poly(const Quat<Scalar>& q) {
  const Scalar w = q(0);
  const Vec3<Scalar> v = q.template tail<3>();
  Mat3<Scalar> r = (w * w - v.squaredNorm()) * Mat3<Scalar>::Identity();
  r += Scalar(2) * v * v.transpose();
  r += Scalar(2) * w * hat(v);
  return r;
}

/// Rotation matrix of q (renormalized internally).
/// quat_to_rotmat(-q) == quat_to_rotmat(q).
template <typename Scalar>
Mat3<Scalar> quat_to_rotmat(const Quat<Scalar>& q_in) {
  return rotmat_poly<Scalar>(quat_normalized(q_in));
}

/// Inverse map SO(3) -> S^3 with the q_w >= 0 sign convention.
/// Uses the four-branch extraction keyed on the largest of
/// {trace, R00, R11, R22} for numerical stability.
template <typename Scalar>
Quat<Scalar> rotmat_to_quat(const Mat3<Scalar>& r, Scalar tol = Scalar(1e-6)) {
  const Scalar ortho_err = (r.transpose() * r - Mat3<Scalar>::Identity())
                               .template lpNorm<Eigen::Infinity>();
  if (!(ortho_err <= tol) || !(std::abs(r.determinant() - Scalar(1)) <= Scalar(10) * tol)) {
    throw InvalidArgument("rotmat_to_quat: matrix is not a proper rotation");
  }
  Quat<Scalar> q;
  const Scalar tr = r.trace();
  if (tr > r(0, 0) && tr > r(1, 1) && tr > r(2, 2)) {
    const Scalar s = std::sqrt(tr + Scalar(1)) * Scalar(2);
    q << s / Scalar(4), (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s,
        (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
    const Scalar s = std::sqrt(Scalar(1) + r(0, 0) - r(1, 1) - r(2, 2)) * Scalar(2);
    q << (r(2, 1) - r(1, 2)) / s, s / Scalar(4), (r(0, 1) + r(1, 0)) / s,
        (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) > r(2, 2)) {
    const Scalar s = std::sqrt(Scalar(1) + r(1, 1) - r(0, 0) - r(2, 2)) * Scalar(2);
    q << (r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, s / Scalar(4),
        (r(1, 2) + r(2, 1)) / s;
  } else {
    const Scalar s = std::sqrt(Scalar(1) + r(2, 2) - r(0, 0) - r(1, 1)) * Scalar(2);
    q << (r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s,
        s / Scalar(4);
  }
  q.normalize();
  if (q(0) < Scalar(0)) q = -q;
  return q;
}

/// Rotate v by q without forming the matrix.
template <typename Scalar>
Vec3<Scalar> quat_rotate(const Quat<Scalar>& q, const Vec3<Scalar>& v) {
  const Scalar w = q(0);
  const Vec3<Scalar> u = q.template tail<3>();
  return (w * w - u.squaredNorm()) * v + Scalar(2) * u.dot(v) * u +
         Scalar(2) * w * u.cross(v);
}

/// d(R(q) v)/dq for fixed v, 3x4. Valid for unit q.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 4> rotate_jacobian_q(const Quat<Scalar>& q, const Vec3<Scalar>& v) {
  const Scalar w = q(0);
  const Vec3<Scalar> u = q.template tail<3>();
  Eigen::Matrix<Scalar, 3, 4> j;
  j.col(0) = Scalar(2) * (w * v + u.cross(v));
  j.template rightCols<3>() = Scalar(2) * (-v * u.transpose() + u * v.transpose() +
                                           u.dot(v) * Mat3<Scalar>::Identity() -
                                           w * hat(v));
  return j;
}

/// d(R(q)^T v)/dq for fixed v, 3x4. Valid for unit q.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 4> rotate_transpose_jacobian_q(const Quat<Scalar>& q,
                                                        const Vec3<Scalar>& v) {
  const Scalar w = q(0);
  const Vec3<Scalar> u = q.template tail<3>();
  Eigen::Matrix<Scalar, 3, 4> j;
  j.col(0) = Scalar(2) * (w * v - u.cross(v));
  j.template rightCols<3>() = Scalar(2) * (-v * u.transpose() + u * v.transpose() +
                                           u.dot(v) * Mat3<Scalar>::Identity() +
                                           w * hat(v));
  return j;
}

/// Jacobian of v -> v/|v| at v, n x n.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime,
              Derived::RowsAtCompileTime>
normalize_jacobian(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  constexpr int N = Derived::RowsAtCompileTime;
  const Scalar n = v.norm();
  const Eigen::Matrix<Scalar, N, 1> u = v / n;
  return (Eigen::Matrix<Scalar, N, N>::Identity() - u * u.transpose()) / n;
}

}  // namespace cablelift
