#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace cablelift {

template <typename Scalar> using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Vec4 = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar> using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar> using Mat4 = Eigen::Matrix<Scalar, 4, 4>;

/// Quaternion stored scalar-first: [w, x, y, z], Hamilton convention.
template <typename Scalar> using Quat = Vec4<Scalar>;

using Vec3d = Vec3<double>;
using Vec4d = Vec4<double>;
using Mat3d = Mat3<double>;
using Mat4d = Mat4<double>;
using Quatd = Quat<double>;
using VecXd = Eigen::VectorXd;
using MatXd = Eigen::MatrixXd;

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidArgument : Error {
  using Error::Error;
};

struct InvalidConfiguration : Error {
  using Error::Error;
};

/// Thrown when an integrator produces a non-finite state; carries the input
/// state so the failure can be reproduced.
struct IntegrationFailure : Error {
  IntegrationFailure(const std::string& what, VecXd state_in)
      : Error(what), state(std::move(state_in)) {}
  VecXd state;
};

/// Thrust magnitude too small to define a direction.
struct DegenerateThrust : Error {
  using Error::Error;
};

/// Thrust direction parallel to the heading vector; caller must perturb psi.
struct SingularHeading : Error {
  using Error::Error;
};

/// Antipodal quaternion pair in a finite-difference body-rate recovery.
struct DegenerateStep : Error {
  using Error::Error;
};

struct QpInfeasible : Error {
  using Error::Error;
};

struct LinearizationFailure : Error {
  LinearizationFailure(const std::string& what, int node_in)
      : Error(what), node(node_in) {}
  int node;
};

struct ParseError : Error {
  ParseError(const std::string& what, int line_in) : Error(what), line(line_in) {}
  int line;
};

}  // namespace cablelift
