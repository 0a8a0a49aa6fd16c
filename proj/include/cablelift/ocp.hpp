#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "cablelift/constraints.hpp"
#include "cablelift/state.hpp"
#include "cablelift/system_config.hpp"
#include "cablelift/types.hpp"

namespace cablelift {

/// L1/L2 coefficients of one soft-constraint family: a violation s >= 0
/// contributes l1*s + l2*s^2 to the objective.
struct SlackWeights {
  double l1 = 1e3;
  double l2 = 1e4;
};

/// Diagonal tracking weights of the OCP cost. Terminal weights default to the
/// stage weights.
struct OcpWeights {
  Vec3d q_p = Vec3d::Constant(200.0);
  Vec3d q_v = Vec3d::Constant(200.0);
  Vec3d q_q = Vec3d::Constant(500.0);
  Vec3d q_w = Vec3d::Constant(50.0);
  Vec3d q_s = Vec3d::Constant(50.0);
  Vec3d q_r = Vec3d::Constant(100.0);
  Vec3d q_rdot = Vec3d::Constant(10.0);
  Vec3d r_c = Vec3d::Constant(1.0);
  double r_t = 1.0;

  Vec3d q_p_e, q_v_e, q_q_e, q_w_e, q_s_e, q_r_e, q_rdot_e;
  bool terminal_set = false;  ///< when false, terminal weights mirror stage

  std::array<SlackWeights, kNumConstraintFamilies> slack;

  OcpWeights() { sync_terminal(); }

  void sync_terminal() {
    if (terminal_set) return;
    q_p_e = q_p;
    q_v_e = q_v;
    q_q_e = q_q;
    q_w_e = q_w;
    q_s_e = q_s;
    q_r_e = q_r;
    q_rdot_e = q_rdot;
  }

  void validate(int n) const;
};

/// Per-node references; constant-setpoint broadcast supported.
struct ReferenceTrajectory {
  std::vector<VecXd> x_nodes;  // N+1 entries in LoadCableState layout
  std::vector<VecXd> u_nodes;  // N entries in ControlInput layout

  static ReferenceTrajectory constant(const VecXd& x_r, const VecXd& u_r, int horizon) {
    ReferenceTrajectory t;
    t.x_nodes.assign(horizon + 1, x_r);
    t.u_nodes.assign(horizon, u_r);
    return t;
  }

  int horizon() const { return static_cast<int>(u_nodes.size()); }
  void validate(int nx, int nu) const;
};

/// Finite-horizon tracking OCP over the load-cable model.
struct OcpProblem {
  SystemConfig cfg;
  OcpWeights weights;
  int horizon = 20;   ///< N shooting intervals
  double dt = 0.1;    ///< s
  LoadCableState x0;  ///< initial-condition equality
  ReferenceTrajectory reference;

  OcpProblem() : x0(1) {}
  void validate() const;
};

/// Weighted squared tracking residual of one node (no dt scaling):
///   |x_r - x|_Q^2 + |u_r - u|_R^2
/// with the attitude block measured by the error quaternion's vector part,
/// e_q = vec(q_r^{-1} ⊗ q).
double stage_cost(const VecXd& x, const VecXd& u, const VecXd& x_r, const VecXd& u_r,
                  const OcpWeights& w);

/// Terminal node: |x_r - x|_{Q_e}^2.
double terminal_cost(const VecXd& x, const VecXd& x_r, const OcpWeights& w);

/// Multiple-shooting defect rk4_step(x_k, u_k) - x_{k+1}, with the quaternion
/// block hemisphere-aligned before subtraction.
VecXd shooting_residual(const VecXd& x_k, const VecXd& u_k, const VecXd& x_k1,
                        const SystemConfig& cfg, double dt);

struct SoftConstraintTerms {
  std::vector<double> slacks;  ///< one per margin row, = max(0, -m)
  double penalty = 0.0;        ///< sum of l1*s + l2*s^2
};

/// Violations of the stage path constraints and their penalty value.
SoftConstraintTerms soft_constraint_terms(const LoadCableState& x, const ControlInput& u,
                                          const SystemConfig& cfg, const OcpWeights& w);

/// Transcribed NLP: decision vector z = [x_0..x_N, u_0..u_{N-1}, slacks],
/// equality constraints are the initial condition plus N shooting defects,
/// and the path inequalities enter purely through the slack penalties
/// (slacks >= 0 are the only bounds). The slack section is separable and
/// monotonic, so its partial minimizer is closed-form (s = max(0, -margin));
/// objective() evaluates at that minimizer.
class OcpNlp {
 public:
  explicit OcpNlp(const OcpProblem& problem);

  const OcpProblem& problem() const { return *problem_; }

  int nx() const { return nx_; }
  int nu() const { return nu_; }
  int horizon() const { return n_; }

  int x_offset(int k) const { return nx_ * k; }
  int u_offset(int k) const { return nx_ * (n_ + 1) + nu_ * k; }
  int num_primal() const { return nx_ * (n_ + 1) + nu_ * n_; }
  int num_slack() const { return num_slack_; }
  int slack_offset() const { return num_primal(); }
  int num_vars() const { return num_primal() + num_slack_; }
  int num_eq() const { return nx_ * (n_ + 1); }  // IC + N defects

  /// Tracking cost (stage terms scaled by dt, terminal unscaled) plus the
  /// soft-constraint penalty with slacks at their closed-form minimizer.
  double objective(const VecXd& z_primal) const;

  /// Slack values minimizing the objective at fixed primal variables.
  VecXd eliminate_slacks(const VecXd& z_primal) const;

  /// [x0 - z_x0; rk4(x_k,u_k) - x_{k+1} for k = 0..N-1].
  VecXd equality_residuals(const VecXd& z_primal) const;

  /// Gradient of objective() by the analytic path (tracking residual
  /// Jacobians plus margin gradients); matches central finite differences of
  /// objective() away from penalty kinks.
  VecXd objective_gradient(const VecXd& z_primal) const;

  /// Stage-banded structure: defect row block k touches [x_k, u_k, x_{k+1}].
  struct Sparsity {
    int nx, nu, horizon;
    int defect_cols(int) const { return 2 * nx + nu; }
  };
  Sparsity sparsity() const { return {nx_, nu_, n_}; }

  /// Margin rows per node; nodes 0..N-1 count all families, node N only the
  /// state-only ones.
  int num_stage_margins() const { return stage_margin_count_; }
  int num_terminal_margins() const { return terminal_margin_count_; }

 private:
  const OcpProblem* problem_;
  int nx_, nu_, n_;
  int stage_margin_count_, terminal_margin_count_, num_slack_;
};

/// Checks the problem and builds the NLP description.
OcpNlp build_nlp(const OcpProblem& problem);

}  // namespace cablelift
