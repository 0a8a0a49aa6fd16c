#pragma once

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "cablelift/constraints.hpp"
#include "cablelift/ocp.hpp"
#include "cablelift/qp.hpp"
#include "cablelift/state.hpp"
#include "cablelift/types.hpp"

namespace cablelift {

struct SolverSettings {
  int max_sqp_iterations = 1;  ///< 1 = real-time iteration mode
  double qp_tolerance = 1e-8;
  double eps_reg = 1e-8;  ///< Levenberg regularization floor
  bool line_search = false;  ///< Armijo on an L1 merit; off in RTI mode
  bool warm_start = true;    ///< shift the previous solution between calls
  int max_qp_iterations = 60;  ///< interior-point iterations per QP solve

  void validate() const {
    if (!(qp_tolerance > 0.0) || !(eps_reg > 0.0)) {
      throw InvalidConfiguration("solver: tolerances must be > 0");
    }
  }
};

enum class SolveStatus { Success, QpFailure, LinearizationError };

struct SolveStats {
  double linearize_ms = 0.0;
  double qp_ms = 0.0;
  double total_ms = 0.0;
  int sqp_iterations = 0;
  int qp_iterations = 0;  ///< penalty activation-set passes
  double kkt_residual = 0.0;  ///< NLP stationarity + defect infinity norm
  double defect_norm = 0.0;
  double objective = 0.0;
  double step_norm = 0.0;
  std::array<double, kNumConstraintFamilies> slack_sum{};
  SolveStatus status = SolveStatus::Success;
  bool warm_started = false;
};

struct OcpSolution {
  std::vector<LoadCableState> states;  // N+1; states[0] == x0 exactly
  std::vector<ControlInput> inputs;    // N
  std::vector<std::vector<double>> node_slacks;  // per node, >= 0
  std::vector<ConstraintReport> node_reports;
  double objective = 0.0;
};

/// Gauss-Newton SQP in a real-time-iteration scheme over the multiple-
/// shooting NLP. The path constraints enter as L1/L2 slack penalties; the QP
/// subproblem (slacks eliminated in closed form, leaving a convex piecewise-
/// quadratic objective) is solved exactly by an activation-set iteration
/// around a Riccati sweep.
///
/// A solver instance owns mutable workspace and is confined to one thread per
/// solve; distinct instances may run concurrently.
class SqpSolver {
 public:
  SqpSolver(OcpProblem problem, SolverSettings settings = {});

  const OcpProblem& problem() const { return problem_; }
  const SolverSettings& settings() const { return settings_; }
  SolverSettings& settings() { return settings_; }

  /// Reset the trajectory guess to a rollout from x0 under the reference
  /// inputs (dynamically feasible cold start).
  void cold_start(const LoadCableState& x0);

  bool has_guess() const { return has_guess_; }

  /// One RTI step: embed x0, linearize once, solve the penalty QP, take the
  /// full step. With warm_start the stored trajectory is shifted by one node
  /// first (tail duplicated). On QP failure the shifted previous solution is
  /// returned with QpFailure status.
  std::pair<OcpSolution, SolveStats> rti_step(const LoadCableState& x0);

  /// Repeated non-shifting RTI steps at a fixed x0 until the NLP KKT residual
  /// drops below kkt_tol; plain full-step SQP.
  std::pair<OcpSolution, SolveStats> solve(const LoadCableState& x0, int max_iterations,
                                           double kkt_tol);

 private:
  struct Linearization;

  void shift_guess();
  OcpSolution package_solution() const;
  bool linearize(Linearization& lin) const;
  /// One linearize + QP + full step on the stored guess; false on QP failure.
  bool sqp_iteration(const LoadCableState& x0, SolveStats& stats);

  OcpProblem problem_;
  SolverSettings settings_;
  OcpNlp nlp_;
  std::vector<VecXd> x_guess_;  // N+1
  std::vector<VecXd> u_guess_;  // N
  bool has_guess_ = false;
};

/// Hover equilibrium for a symmetric layout: cables vertical, tensions m g / n.
/// Useful as a reference and in tests.
std::pair<LoadCableState, ControlInput> hover_equilibrium(const SystemConfig& cfg,
                                                          const Vec3d& position);

}  // namespace cablelift
