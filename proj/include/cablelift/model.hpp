#pragma once

#include <Eigen/Core>

#include "cablelift/state.hpp"
#include "cablelift/system_config.hpp"
#include "cablelift/types.hpp"

namespace cablelift {

/// Continuous-time right-hand side of the load-cable model, returned in the
/// LoadCableState layout:
///   p'     = v
///   v'     = -sum_i t_i s_i / m + g
///   q'     = 1/2 Q(q) [0, omega_L]
///   omega' = I_L^{-1} (-omega x I_L omega + sum_i t_i (R^T s_i x rho_i))
///   s_i'   = r_i x s_i
///   r_i'   = rdot_i,  rdot_i' = c_i
/// s_i points from the UAV toward the attachment point, so the tension force
/// on the load is -t_i s_i.
VecXd dynamics(const LoadCableState& x, const ControlInput& u, const SystemConfig& cfg);

/// Classical RK4 step with zero-order-hold input; q and every s_i are
/// renormalized afterward. Throws IntegrationFailure on a non-finite result.
LoadCableState rk4_step(const LoadCableState& x, const ControlInput& u,
                        const SystemConfig& cfg, double dt);

/// Jacobians of the continuous dynamics, A = d(xdot)/dx, B = d(xdot)/du.
struct ContinuousJacobian {
  MatXd A;
  MatXd B;
};

ContinuousJacobian dynamics_jacobian(const LoadCableState& x, const ControlInput& u,
                                     const SystemConfig& cfg);

/// Exact derivatives of rk4_step (forward sensitivity through the four
/// stages, including the final renormalization of q and s_i).
struct DiscreteSensitivity {
  MatXd A;  ///< d x+ / d x
  MatXd B;  ///< d x+ / d u
};

struct StepWithSensitivity {
  LoadCableState next;
  DiscreteSensitivity sens;
};

StepWithSensitivity rk4_step_with_sensitivity(const LoadCableState& x,
                                              const ControlInput& u,
                                              const SystemConfig& cfg, double dt);

inline DiscreteSensitivity rk4_sensitivity(const LoadCableState& x, const ControlInput& u,
                                           const SystemConfig& cfg, double dt) {
  return rk4_step_with_sensitivity(x, u, cfg, dt).sens;
}

}  // namespace cablelift
