#include "cablelift/simloop.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "cablelift/geometry.hpp"
#include "cablelift/model.hpp"

namespace cablelift {

void Scenario::validate() const {
  if (cfg.n < 1) throw InvalidConfiguration("scenario: config not initialized");
  if (initial_state.n_uav() != cfg.n) {
    throw InvalidConfiguration("scenario: initial state does not match config");
  }
  initial_state.validate();
  if (!(duration > 0.0)) throw InvalidConfiguration("scenario: duration must be > 0");
  if (!(control_period > 0.0) || !(substep > 0.0)) {
    throw InvalidConfiguration("scenario: control period and substep must be > 0");
  }
  const double ratio = control_period / substep;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    throw InvalidConfiguration(
        "scenario: control period must be an integer multiple of the substep");
  }
  if (horizon < 1) throw InvalidConfiguration("scenario: horizon must be >= 1");
  if (tension_ref.size() != cfg.n || heading_ref.size() != cfg.n) {
    throw InvalidConfiguration("scenario: per-UAV reference arrays must match n");
  }
  if (std::abs(Quatd(q_ref).norm() - 1.0) > 1e-6) {
    throw InvalidConfiguration("scenario: q_ref must be normalized");
  }
  weights.validate(cfg.n);
  solver.validate();
}

ReferenceTrajectory Scenario::build_reference() const {
  VecXd x_r = VecXd::Zero(LoadCableState::dim(cfg.n));
  x_r.segment<3>(0) = p_ref;
  x_r.segment<4>(6) = q_ref;
  VecXd u_r = VecXd::Zero(ControlInput::dim(cfg.n));
  for (int i = 0; i < cfg.n; ++i) u_r(4 * i + 3) = tension_ref(i);
  return ReferenceTrajectory::constant(x_r, u_r, horizon);
}

OcpProblem Scenario::build_ocp() const {
  OcpProblem p;
  p.cfg = cfg;
  p.weights = weights;
  p.horizon = horizon;
  p.dt = control_period;
  p.x0 = initial_state;
  p.reference = build_reference();
  return p;
}

Scenario Scenario::demo_quad() {
  Scenario s;
  s.cfg = SystemConfig::demo_quad();
  s.initial_state = LoadCableState(4);
  s.p_ref = Vec3d(10.0, 3.0, 5.0);
  // Paper-style scalar-last notation [x y z w] = [0.27 -0.27 0.65 0.65],
  // normalized on load.
  s.q_ref = Quatd(0.65, 0.27, -0.27, 0.65).normalized();
  s.tension_ref = VecXd::Constant(4, 9.8);
  s.heading_ref = VecXd::Zero(4);
  s.duration = 15.0;
  s.name = "demo_quad";
  return s;
}

Scenario Scenario::regular_polygon(int n) {
  Scenario s = demo_quad();
  s.cfg = SystemConfig::regular_polygon(n);
  s.initial_state = LoadCableState(n);
  s.tension_ref = VecXd::Constant(n, 9.8);
  s.heading_ref = VecXd::Zero(n);
  s.name = "polygon_" + std::to_string(n);
  return s;
}

std::pair<double, double> pose_error(const LoadCableState& state, const Vec3d& p_r,
                                     const Quatd& q_r) {
  const double pos = (Vec3d(state.position()) - p_r).norm();
  const double dot = std::min(1.0, std::abs(state.quat().dot(q_r)));
  return {pos, 2.0 * std::acos(dot)};
}

double SimLog::peak_speed_component() const {
  double peak = 0.0;
  for (const auto& s : steps) {
    peak = std::max(peak, Vec3d(s.state.velocity()).cwiseAbs().maxCoeff());
  }
  return peak;
}

double SimLog::peak_horizontal_speed() const {
  double peak = 0.0;
  for (const auto& s : steps) {
    peak = std::max(peak, Vec3d(s.state.velocity()).head<2>().norm());
  }
  return peak;
}

double SimLog::peak_vertical_speed() const {
  double peak = 0.0;
  for (const auto& s : steps) {
    peak = std::max(peak, std::abs(s.state.velocity()(2)));
  }
  return peak;
}

const SimStep* SimLog::at_time(double t, double tol) const {
  for (const auto& s : steps) {
    if (std::abs(s.t - t) <= tol) return &s;
  }
  return nullptr;
}

SimLog run(const Scenario& scenario) {
  scenario.validate();
  SimLog log;
  const auto& cfg = scenario.cfg;
  const int n = cfg.n;
  const int n_controls =
      static_cast<int>(std::round(scenario.duration / scenario.control_period));
  const int n_sub =
      static_cast<int>(std::round(scenario.control_period / scenario.substep));

  SqpSolver solver(scenario.build_ocp(), scenario.solver);
  LoadCableState x = scenario.initial_state;
  int consecutive_failures = 0;

  for (int step = 0; step <= n_controls; ++step) {
    SimStep row;
    row.t = step * scenario.control_period;
    row.state = x;

    auto [sol, stats] = solver.rti_step(x);
    row.input = sol.inputs.front();
    row.stats = stats;

    if (stats.status != SolveStatus::Success) {
      ++consecutive_failures;
    } else {
      consecutive_failures = 0;
    }

    const VecXd x_dot = dynamics(x, row.input, cfg);
    row.uav.reserve(n);
    for (int i = 0; i < n; ++i) {
      row.uav.push_back(
          recover_reference(x, row.input, x_dot, i, cfg, scenario.heading_ref(i)));
    }
    row.report = evaluate_all(x, row.input, cfg);
    const auto err = pose_error(x, scenario.p_ref, Quatd(scenario.q_ref));
    row.position_error = err.first;
    row.attitude_error = err.second;
    log.steps.push_back(std::move(row));

    if (consecutive_failures >= 10) {
      log.status = SimStatus::SolverFailure;
      log.diagnostic = "solver failed for 10 consecutive control steps";
      break;
    }
    if (step == n_controls) break;

    try {
      for (int k = 0; k < n_sub; ++k) {
        x = rk4_step(x, log.steps.back().input, cfg, scenario.substep);
      }
    } catch (const IntegrationFailure& e) {
      log.status = SimStatus::IntegrationFailure;
      log.diagnostic = e.what();
      break;
    }
  }

  // Body rates from consecutive recovered attitudes (trapezoidal finite
  // difference); the final sample repeats the previous rate.
  for (size_t k = 0; k + 1 < log.steps.size(); ++k) {
    for (int i = 0; i < n; ++i) {
      const auto est = reference_body_rate(log.steps[k].uav[i].attitude,
                                           log.steps[k + 1].uav[i].attitude,
                                           scenario.control_period);
      log.steps[k].uav[i].body_rate = est.omega;
      log.steps[k].uav[i].body_rate_residual = est.scalar_residual;
    }
  }
  if (log.steps.size() >= 2) {
    const auto& prev = log.steps[log.steps.size() - 2];
    for (int i = 0; i < n; ++i) {
      log.steps.back().uav[i].body_rate = prev.uav[i].body_rate;
      log.steps.back().uav[i].body_rate_residual = prev.uav[i].body_rate_residual;
    }
  }
  return log;
}

double BenchmarkRow::median_total_ms() const { return quantile_total_ms(0.5); }

double BenchmarkRow::quantile_total_ms(double q) const {
  if (stats.empty()) return 0.0;
  std::vector<double> t;
  t.reserve(stats.size());
  for (const auto& s : stats) t.push_back(s.total_ms);
  std::sort(t.begin(), t.end());
  const double pos = q * (t.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, t.size() - 1);
  return t[lo] + (pos - lo) * (t[hi] - t[lo]);
}

namespace {

BenchmarkRow benchmark_one(int n, int steps, const Scenario& scenario_template) {
  BenchmarkRow row;
  row.n_uav = n;
  try {
    Scenario s = Scenario::regular_polygon(n);
    s.weights = scenario_template.weights;
    s.solver = scenario_template.solver;
    s.control_period = scenario_template.control_period;
    s.substep = scenario_template.substep;
    s.horizon = scenario_template.horizon;
    s.p_ref = scenario_template.p_ref;
    s.q_ref = scenario_template.q_ref;
    s.duration = steps * s.control_period;

    SqpSolver solver(s.build_ocp(), s.solver);
    LoadCableState x = s.initial_state;
    const int n_sub = static_cast<int>(std::round(s.control_period / s.substep));
    for (int k = 0; k < steps; ++k) {
      auto [sol, stats] = solver.rti_step(x);
      row.stats.push_back(stats);
      if (stats.status != SolveStatus::Success) {
        row.diagnostic = "solver failure at step " + std::to_string(k);
        return row;
      }
      for (int j = 0; j < n_sub; ++j) {
        x = rk4_step(x, sol.inputs.front(), s.cfg, s.substep);
      }
    }
    row.ok = true;
  } catch (const Error& e) {
    row.diagnostic = e.what();
  }
  return row;
}

}  // namespace

std::vector<BenchmarkRow> benchmark(const std::vector<int>& n_list, int steps,
                                    const Scenario& scenario_template, int max_threads) {
  std::vector<BenchmarkRow> rows(n_list.size());
  if (steps <= 0) return {};

  if (max_threads <= 1) {
    for (size_t i = 0; i < n_list.size(); ++i) {
      rows[i] = benchmark_one(n_list[i], steps, scenario_template);
    }
    return rows;
  }

  std::vector<std::thread> pool;
  size_t next = 0;
  while (next < n_list.size()) {
    const size_t batch = std::min<size_t>(max_threads, n_list.size() - next);
    pool.clear();
    for (size_t j = 0; j < batch; ++j) {
      const size_t idx = next + j;
      pool.emplace_back([&rows, &n_list, steps, &scenario_template, idx] {
        rows[idx] = benchmark_one(n_list[idx], steps, scenario_template);
      });
    }
    for (auto& t : pool) t.join();
    next += batch;
  }
  return rows;
}

}  // namespace cablelift
