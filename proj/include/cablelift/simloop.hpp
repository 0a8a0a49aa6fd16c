#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "cablelift/constraints.hpp"
#include "cablelift/flatness.hpp"
#include "cablelift/ocp.hpp"
#include "cablelift/solver.hpp"
#include "cablelift/state.hpp"
#include "cablelift/system_config.hpp"
#include "cablelift/types.hpp"

namespace cablelift {

/// Everything needed to run one closed-loop simulation.
struct Scenario {
  SystemConfig cfg;
  LoadCableState initial_state;
  Vec3d p_ref = Vec3d::Zero();
  Quatd q_ref = Quatd(1, 0, 0, 0);
  VecXd tension_ref;   ///< per cable (N)
  VecXd heading_ref;   ///< psi per UAV (rad)
  double duration = 15.0;        ///< s
  double control_period = 0.1;   ///< s, NMPC update interval
  double substep = 1e-3;         ///< s, plant integration step
  int horizon = 20;              ///< shooting intervals, dt = control_period
  OcpWeights weights;
  SolverSettings solver;
  std::string name = "scenario";

  Scenario() : initial_state(1) {}

  void validate() const;

  /// Constant-setpoint reference in the OCP layout: [p_ref, 0, q_ref, 0] with
  /// zero cable entries; inputs hold the tension references and zero jerk.
  ReferenceTrajectory build_reference() const;

  OcpProblem build_ocp() const;

  /// The 4-UAV demo setup: hover start at the origin, reference pose
  /// [10, 3, 5] m with a 90 degree yaw / 45 degree roll attitude, 9.8 N
  /// tension references, 15 s run.
  static Scenario demo_quad();

  /// Same maneuver for an n-UAV regular polygon layout (benchmark template).
  static Scenario regular_polygon(int n);
};

enum class SimStatus { Completed, SolverFailure, IntegrationFailure };

struct SimStep {
  double t = 0.0;
  LoadCableState state;
  ControlInput input;  ///< applied over [t, t + control_period)
  std::vector<UavReference> uav;
  ConstraintReport report;
  SolveStats stats;
  double position_error = 0.0;  // m
  double attitude_error = 0.0;  // rad

  SimStep() : state(1), input(1) {}
};

struct SimLog {
  std::vector<SimStep> steps;
  SimStatus status = SimStatus::Completed;
  std::string diagnostic;

  double peak_speed_component() const;
  double peak_horizontal_speed() const;
  double peak_vertical_speed() const;
  const SimStep* at_time(double t, double tol = 1e-9) const;
};

/// Closed-loop run: at each control instant one rti_step produces the input,
/// which is held while the plant is integrated with rk4 substeps. UAV
/// references (including body rates from consecutive attitudes) and
/// constraint reports are logged every control period.
SimLog run(const Scenario& scenario);

/// position error |p - p_r| and attitude error 2 acos(|<q, q_r>|).
std::pair<double, double> pose_error(const LoadCableState& state, const Vec3d& p_r,
                                     const Quatd& q_r);

struct BenchmarkRow {
  int n_uav = 0;
  std::vector<SolveStats> stats;  ///< one per NMPC step
  bool ok = false;
  std::string diagnostic;

  double median_total_ms() const;
  double quantile_total_ms(double q) const;
};

/// Closed-loop timing per UAV count; each n gets a regular-polygon layout.
/// Per-n failures are recorded and the sweep continues. `steps` = 0 yields an
/// empty table. max_threads <= 1 runs sequentially (recommended for timing);
/// larger values run distinct n values concurrently.
std::vector<BenchmarkRow> benchmark(const std::vector<int>& n_list, int steps,
                                    const Scenario& scenario_template,
                                    int max_threads = 1);

}  // namespace cablelift
