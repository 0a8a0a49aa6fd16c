#include "cablelift/logging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace cablelift {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> margin_column_names(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("margin_thrust_" + std::to_string(i));
  for (int i = 0; i < n; ++i) names.push_back("margin_tension_" + std::to_string(i));
  for (int i = 0; i < n; ++i) names.push_back("margin_cable_load_" + std::to_string(i));
  for (int i = 0; i < n; ++i) names.push_back("margin_cable_uav_" + std::to_string(i));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) {
        names.push_back("margin_dist_" + std::to_string(i) + "_" + std::to_string(j));
      }
    }
  }
  return names;
}

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

void write_trajectory_csv(const SimLog& log, const SystemConfig& cfg,
                          const std::string& path) {
  const int n = cfg.n;
  auto out = open_or_throw(path);

  std::vector<std::string> cols = {"t",   "p_x", "p_y", "p_z", "v_x", "v_y", "v_z",
                                   "q_w", "q_x", "q_y", "q_z", "w_x", "w_y", "w_z"};
  const char* axes = "xyz";
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) cols.push_back("s" + std::to_string(i) + "_" + axes[a]);
    for (int a = 0; a < 3; ++a) cols.push_back("r" + std::to_string(i) + "_" + axes[a]);
    for (int a = 0; a < 3; ++a) cols.push_back("rd" + std::to_string(i) + "_" + axes[a]);
  }
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) cols.push_back("c" + std::to_string(i) + "_" + axes[a]);
    cols.push_back("t" + std::to_string(i));
  }
  for (int i = 0; i < n; ++i) {
    const std::string u = "uav" + std::to_string(i);
    for (int a = 0; a < 3; ++a) cols.push_back(u + "_p" + axes[a]);
    for (int a = 0; a < 3; ++a) cols.push_back(u + "_v" + axes[a]);
    cols.push_back(u + "_f");
    for (int a = 0; a < 3; ++a) cols.push_back(u + "_z" + axes[a]);
    cols.push_back(u + "_qw");
    cols.push_back(u + "_qx");
    cols.push_back(u + "_qy");
    cols.push_back(u + "_qz");
    for (int a = 0; a < 3; ++a) cols.push_back(u + "_w" + axes[a]);
  }
  for (const auto& m : margin_column_names(n)) cols.push_back(m);
  cols.push_back("err_pos");
  cols.push_back("err_att");

  for (size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";

  for (const auto& s : log.steps) {
    std::vector<double> row;
    row.push_back(s.t);
    for (int k = 0; k < s.state.size(); ++k) row.push_back(s.state.raw()(k));
    for (int k = 0; k < s.input.size(); ++k) row.push_back(s.input.raw()(k));
    for (int i = 0; i < n; ++i) {
      const auto& u = s.uav[i];
      for (int a = 0; a < 3; ++a) row.push_back(u.position(a));
      for (int a = 0; a < 3; ++a) row.push_back(u.velocity(a));
      row.push_back(u.thrust);
      for (int a = 0; a < 3; ++a) row.push_back(u.thrust_dir(a));
      for (int a = 0; a < 4; ++a) row.push_back(u.attitude(a));
      for (int a = 0; a < 3; ++a) row.push_back(u.body_rate(a));
    }
    for (const auto& r : s.report.rows) row.push_back(r.margin);
    row.push_back(s.position_error);
    row.push_back(s.attitude_error);

    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt(row[i]);
    out << "\n";
  }
}

void write_constraints_csv(const SimLog& log, const std::string& path) {
  auto out = open_or_throw(path);
  out << "t,label,value,bound,margin,satisfied\n";
  for (const auto& s : log.steps) {
    for (const auto& r : s.report.rows) {
      out << fmt(s.t) << "," << r.label << "," << fmt(r.value) << "," << fmt(r.bound)
          << "," << fmt(r.margin) << "," << (r.satisfied ? 1 : 0) << "\n";
    }
  }
}

void write_summary_json(const SimLog& log, const Scenario& scenario,
                        const std::string& path) {
  using nlohmann::json;
  json j;
  j["scenario"] = scenario.name;
  j["n"] = scenario.cfg.n;
  j["duration_s"] = scenario.duration;
  j["control_period_s"] = scenario.control_period;
  j["substep_s"] = scenario.substep;
  j["horizon"] = scenario.horizon;
  j["steps"] = log.steps.size();
  switch (log.status) {
    case SimStatus::Completed: j["status"] = "completed"; break;
    case SimStatus::SolverFailure: j["status"] = "solver_failure"; break;
    case SimStatus::IntegrationFailure: j["status"] = "integration_failure"; break;
  }
  if (!log.diagnostic.empty()) j["diagnostic"] = log.diagnostic;

  const auto errors_at = [&](double t) -> json {
    const SimStep* s = log.at_time(t, 1e-6);
    if (!s) return nullptr;
    return json{{"t", s->t},
                {"position_error_m", s->position_error},
                {"attitude_error_rad", s->attitude_error},
                {"attitude_error_deg", s->attitude_error * 180.0 / M_PI}};
  };

  if (!log.steps.empty()) {
    const auto& first = log.steps.front();
    const auto& last = log.steps.back();
    j["initial"] = errors_at(first.t);
    j["final"] = errors_at(last.t);
    j["at_5s"] = errors_at(5.0);
    j["at_10s"] = errors_at(10.0);
    const SimStep* s5 = log.at_time(5.0, 1e-6);
    if (s5 && first.position_error > 0.0 && first.attitude_error > 0.0) {
      j["reduction_at_5s_pct"] = {
          {"position", 100.0 * (1.0 - s5->position_error / first.position_error)},
          {"attitude", 100.0 * (1.0 - s5->attitude_error / first.attitude_error)}};
    }
  }

  j["peak"] = {{"speed_component_mps", log.peak_speed_component()},
               {"horizontal_mps", log.peak_horizontal_speed()},
               {"vertical_mps", log.peak_vertical_speed()}};

  json viol = json::object();
  json worst = json::object();
  for (const auto& s : log.steps) {
    for (const auto& r : s.report.rows) {
      const std::string fam = r.label.substr(0, r.label.find('['));
      if (!worst.contains(fam) || r.margin < worst[fam].get<double>()) {
        worst[fam] = r.margin;
      }
      if (!viol.contains(fam)) viol[fam] = 0;
      if (!(r.margin >= 0.0)) viol[fam] = viol[fam].get<int>() + 1;
    }
  }
  j["constraints"] = {{"violation_rows", viol}, {"worst_margin", worst}};

  if (!log.steps.empty()) {
    std::vector<double> total;
    for (const auto& s : log.steps) total.push_back(s.stats.total_ms);
    std::sort(total.begin(), total.end());
    const auto q = [&](double p) {
      const double pos = p * (total.size() - 1);
      const size_t lo = static_cast<size_t>(pos);
      const size_t hi = std::min(lo + 1, total.size() - 1);
      return total[lo] + (pos - lo) * (total[hi] - total[lo]);
    };
    j["solve_time_ms"] = {{"min", total.front()}, {"p25", q(0.25)},   {"median", q(0.5)},
                          {"p75", q(0.75)},       {"max", total.back()}};
  }
  j["hardware"] = {{"cpu", cpu_model_string()},
                   {"hardware_threads", std::thread::hardware_concurrency()}};

  auto out = open_or_throw(path);
  out << j.dump(2) << "\n";
}

void write_timings_csv(const std::vector<BenchmarkRow>& rows, const std::string& path) {
  auto out = open_or_throw(path);
  out << "n,step,linearize_ms,qp_ms,total_ms,kkt_residual,activation_passes,status\n";
  for (const auto& row : rows) {
    for (size_t k = 0; k < row.stats.size(); ++k) {
      const auto& s = row.stats[k];
      out << row.n_uav << "," << k << "," << fmt(s.linearize_ms) << "," << fmt(s.qp_ms)
          << "," << fmt(s.total_ms) << "," << fmt(s.kkt_residual) << ","
          << s.qp_iterations << "," << (s.status == SolveStatus::Success ? "ok" : "fail")
          << "\n";
    }
  }
}

std::vector<ReplayStep> read_trajectory_csv(const std::string& path, int n_uav) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error("trajectory csv: empty file");
  const auto header = split_csv_line(line);
  const auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error("trajectory csv: missing column " + name);
    return static_cast<int>(it - header.begin());
  };

  const int nx = LoadCableState::dim(n_uav);
  const int nu = ControlInput::dim(n_uav);
  // State and input columns are contiguous by construction.
  const int t_col = col("t");
  const int x_col = col("p_x");
  const int u_col = col("c0_x");

  std::vector<ReplayStep> steps;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto items = split_csv_line(line);
    if (static_cast<int>(items.size()) < u_col + nu) {
      throw Error("trajectory csv: short row at line " + std::to_string(line_no));
    }
    ReplayStep s;
    s.t = std::stod(items[t_col]);
    VecXd x(nx), u(nu);
    for (int k = 0; k < nx; ++k) x(k) = std::stod(items[x_col + k]);
    for (int k = 0; k < nu; ++k) u(k) = std::stod(items[u_col + k]);
    s.state = LoadCableState::from_raw(std::move(x));
    s.input = ControlInput::from_raw(std::move(u));
    steps.push_back(std::move(s));
  }
  return steps;
}

std::string cpu_model_string() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto pos = line.find(':');
      if (pos != std::string::npos) {
        std::string s = line.substr(pos + 1);
        if (!s.empty() && s.front() == ' ') s.erase(0, 1);
        return s;
      }
    }
  }
  return "unknown";
}

}  // namespace cablelift
