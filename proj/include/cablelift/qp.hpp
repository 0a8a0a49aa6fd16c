#pragma once

#include <vector>

#include <Eigen/Core>

#include "cablelift/types.hpp"

namespace cablelift {

/// Convex QP
///   min 1/2 z'Hz + g'z   s.t.  A z = b,  lb <= z <= ub
/// with H symmetric PSD (regularized by the solver when needed). Bounds may
/// be +-inf entry-wise.
struct DenseQp {
  MatXd H;
  VecXd g;
  MatXd A;  ///< equality rows; may have zero rows
  VecXd b;
  VecXd lb, ub;
};

struct QpSettings {
  double tolerance = 1e-8;
  double eps_reg = 1e-8;
  int max_iterations = 200;
};

enum class QpStatus { Solved, MaxIterations, Infeasible };

struct QpResult {
  VecXd z;
  VecXd eq_multipliers;
  VecXd bound_multipliers;  ///< one per variable; sign of the active side
  QpStatus status = QpStatus::Solved;
  double kkt_residual = 0.0;
  int iterations = 0;
};

/// Primal-dual active-set solve over the bound constraints. Throws
/// QpInfeasible for inconsistent equalities; an exceeded iteration budget
/// returns the best iterate with MaxIterations status.
QpResult qp_solve(const DenseQp& qp, const QpSettings& settings = {});

// --- multi-stage (optimal-control) QP ---------------------------------------

/// One shooting interval of the multi-stage QP over deltas:
///   cost_k = 1/2 [dx;du]' [Qxx Qxu; Qxu' Ruu] [dx;du] + qx'dx + ru'du
///   dx_{k+1} = A dx_k + B du_k + d
struct OcpQpStage {
  MatXd Qxx, Qxu, Ruu;
  VecXd qx, ru;
  MatXd A, B;
  VecXd d;
};

/// Banded multi-stage QP with the initial-condition equality dx_0 = x0_shift.
struct OcpQp {
  std::vector<OcpQpStage> stages;  // N entries
  MatXd QN;                        // terminal Hessian
  VecXd qN;
  VecXd x0_shift;

  int horizon() const { return static_cast<int>(stages.size()); }
};

struct OcpQpSolution {
  std::vector<VecXd> dx;   // N+1
  std::vector<VecXd> du;   // N
  std::vector<VecXd> lam;  // N+1: lam[0] for the IC, lam[k+1] for defect k
  double kkt_residual = 0.0;
};

/// Riccati backward/forward sweep; exact KKT solve of the equality-
/// constrained multi-stage QP in O(N) block operations. Ruu blocks failing
/// the factorization are regularized by eps_reg * I.
OcpQpSolution qp_solve(const OcpQp& qp, double eps_reg = 1e-8);

/// Flatten the multi-stage QP into the dense form, z = [x_0..x_N, u_0..u_N-1]
/// (no bounds); used to cross-check the Riccati path.
DenseQp to_dense(const OcpQp& qp);

// --- multi-stage QP with slack-softened inequalities ------------------------

/// One linearized path-constraint row attached to a shooting node:
///   m0 + gx' dx_k + gu' du_k + s >= 0,  s >= 0,
/// with the slack priced l1 s + l2 s^2 in the objective. Terminal rows (node
/// == N) have an empty gu.
struct SoftMargin {
  int node = 0;
  double value = 0.0;  ///< m0, margin at the linearization point
  VecXd grad_x;
  VecXd grad_u;
  double l1 = 0.0;
  double l2 = 0.0;
};

struct SoftQpSettings {
  double tolerance = 1e-9;   ///< complementarity and residual target
  int max_iterations = 60;
  double tau_min = 1e-13;    ///< barrier floor
  double sigma = 0.15;       ///< barrier reduction factor
  double fraction_to_boundary = 0.995;
  double eps_reg = 1e-8;
};

struct SoftQpSolution {
  std::vector<VecXd> dx;   // N+1
  std::vector<VecXd> du;   // N
  std::vector<VecXd> lam;  // equality costates
  VecXd slack;             // per margin, >= 0
  VecXd ineq_dual;         // per margin, >= 0
  double mu = 0.0;         ///< final complementarity measure
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Primal-dual interior-point solve of the multi-stage QP with slack
/// variables on every soft margin. Each iteration eliminates the stage-local
/// (s, duals) triple onto the state-input blocks (a rank-1 Hessian update per
/// margin) and performs one Riccati sweep, so the banded structure is
/// preserved end to end.
SoftQpSolution qp_solve(const OcpQp& qp, const std::vector<SoftMargin>& soft,
                        const SoftQpSettings& settings = {});

}  // namespace cablelift
