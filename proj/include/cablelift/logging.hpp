#pragma once

#include <string>
#include <vector>

#include "cablelift/simloop.hpp"

namespace cablelift {

/// Wide per-control-step table: time, state, applied input, per-UAV
/// references, constraint margins, pose errors. Column layout documented in
/// docs/formats.md. Deterministic output (17 significant digits).
void write_trajectory_csv(const SimLog& log, const SystemConfig& cfg,
                          const std::string& path);

/// Long-format constraint table: t, label, value, bound, margin, satisfied.
void write_constraints_csv(const SimLog& log, const std::string& path);

/// Scalar run summary (final/5s/10s errors, peaks, violation counts, solver
/// timing percentiles, hardware string).
void write_summary_json(const SimLog& log, const Scenario& scenario,
                        const std::string& path);

/// Benchmark table: n, step, linearize_ms, qp_ms, total_ms, kkt, passes.
void write_timings_csv(const std::vector<BenchmarkRow>& rows, const std::string& path);

struct ReplayStep {
  double t = 0.0;
  LoadCableState state;
  ControlInput input;
  ReplayStep() : state(1), input(1) {}
};

/// Reads back the state and input columns of a trajectory.csv; margins are
/// re-derived by the caller.
std::vector<ReplayStep> read_trajectory_csv(const std::string& path, int n_uav);

std::string cpu_model_string();

}  // namespace cablelift
