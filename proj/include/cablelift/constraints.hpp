#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "cablelift/flatness.hpp"
#include "cablelift/state.hpp"
#include "cablelift/system_config.hpp"
#include "cablelift/types.hpp"

namespace cablelift {

struct ConstraintRow {
  std::string label;
  double value = 0.0;
  double bound = 0.0;
  double margin = 0.0;  ///< signed distance to the bound; satisfied iff >= 0
  bool satisfied = false;
};

struct ConstraintReport {
  std::vector<ConstraintRow> rows;
  bool all_satisfied(double tol = 0.0) const {
    for (const auto& r : rows) {
      if (!(r.margin >= -tol)) return false;
    }
    return true;
  }
};

struct ThrustMargins {
  double thrust = 0.0;      // f_i (N)
  double margin_low = 0.0;  // f_i - f_min
  double margin_high = 0.0; // f_max - f_i
};

/// Thrust magnitude and its two margins. x_dot must be dynamics(x, u, cfg).
ThrustMargins thrust_constraint(const LoadCableState& x, const ControlInput& u,
                                const VecXd& x_dot, int i, const SystemConfig& cfg);

/// Distance from UAV i to the cable line of UAV j:
///   d_ij = |(p_i - p_j) x s_j|      (DistanceVariant::CableLine)
///   d_ij = |(p_i - p_j) x s_i|      (DistanceVariant::PaperOwnDirection)
double uav_cable_distance(const LoadCableState& x, int i, int j, const SystemConfig& cfg);

/// (R^T s_i)_z, the cable direction's z component in the load frame.
/// Satisfied iff value <= s_z_max.
double cable_load_clearance(const LoadCableState& x, int i);

/// sigma_i = f_i z_i . s_i. Satisfied iff sigma_i <= sigma_max.
double cable_uav_clearance(const LoadCableState& x, const ControlInput& u,
                           const VecXd& x_dot, int i, const SystemConfig& cfg);

struct TensionMargins {
  double tension = 0.0;
  double margin_low = 0.0;  // t_i - t_min
  double margin_high = 0.0; // t_max - t_i
};

TensionMargins tension_constraint(const ControlInput& u, int i, const SystemConfig& cfg);

/// All families over all UAVs (plus ordered i != j pairs for distance);
/// 4n + n(n-1) rows. Family evaluation errors become flagged rows rather than
/// aborting the report.
ConstraintReport evaluate_all(const LoadCableState& x, const ControlInput& u,
                              const SystemConfig& cfg);

// --- margin set for the OCP soft constraints -------------------------------

enum class ConstraintFamily : int {
  Thrust = 0,
  Tension = 1,
  CableLoad = 2,
  CableUav = 3,
  Distance = 4,
  InputBox = 5,
};
constexpr int kNumConstraintFamilies = 6;
const char* family_name(ConstraintFamily f);

struct StageMargin {
  ConstraintFamily family;
  double value = 0.0;  ///< margin m; feasible iff m >= 0
  VecXd grad;          ///< d m / d [x; u] (d m / d x when no input), empty
                       ///< unless gradients were requested
};

/// Margins used inside the OCP, in a fixed deterministic order. With a null
/// input only the state-only families (Distance, CableLoad) are produced, as
/// needed for the terminal node. A degenerate thrust yields a violated margin
/// with zero gradient instead of throwing.
std::vector<StageMargin> stage_margins(const LoadCableState& x, const ControlInput* u,
                                       const SystemConfig& cfg, bool with_gradients);

/// Family of the margin at `index` in the stage_margins order, without
/// evaluating anything.
ConstraintFamily stage_margin_family(int n_uav, int index, bool terminal);

}  // namespace cablelift
