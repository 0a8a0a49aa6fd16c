// cablelift command line: closed-loop simulation, solver benchmarking, and
// constraint replay for the multi-UAV cable-suspended load NMPC.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cablelift/config_io.hpp"
#include "cablelift/logging.hpp"
#include "cablelift/simloop.hpp"

namespace {

using namespace cablelift;

int env_threads() {
  const char* v = std::getenv("CABLELIFT_THREADS");
  if (!v) return 1;
  const int n = std::atoi(v);
  return n > 0 ? n : 1;
}

Scenario load_scenario(const std::string& config_path, int n_override,
                       double duration_override, int horizon_override,
                       double dt_override) {
  Scenario s = parse_config(config_path);
  if (n_override > 0 && n_override != s.cfg.n) {
    // Regenerate the layout as a regular polygon, keeping tuning and maneuver.
    Scenario t = Scenario::regular_polygon(n_override);
    t.weights = s.weights;
    t.solver = s.solver;
    t.horizon = s.horizon;
    t.duration = s.duration;
    t.control_period = s.control_period;
    t.substep = s.substep;
    t.p_ref = s.p_ref;
    t.q_ref = s.q_ref;
    t.name = s.name + "_n" + std::to_string(n_override);
    s = t;
  }
  if (duration_override > 0) s.duration = duration_override;
  if (horizon_override > 0) s.horizon = horizon_override;
  if (dt_override > 0) s.control_period = dt_override;
  s.validate();
  return s;
}

int run_simulate(const std::string& config_path, const std::string& out_dir,
                 int n_override, double duration_override, int horizon_override,
                 double dt_override, int verbosity) {
  const Scenario s = load_scenario(config_path, n_override, duration_override,
                                   horizon_override, dt_override);
  std::filesystem::create_directories(out_dir);
  const SimLog log = run(s);

  write_trajectory_csv(log, s.cfg, out_dir + "/trajectory.csv");
  write_constraints_csv(log, out_dir + "/constraints.csv");
  write_summary_json(log, s, out_dir + "/summary.json");

  if (verbosity > 0 && !log.steps.empty()) {
    const auto& last = log.steps.back();
    std::cout << "steps: " << log.steps.size() << "\n"
              << "final position error [m]:   " << last.position_error << "\n"
              << "final attitude error [deg]: " << last.attitude_error * 180.0 / M_PI
              << "\n"
              << "peak speed component [m/s]: " << log.peak_speed_component() << "\n";
  }
  if (log.status != SimStatus::Completed) {
    std::cerr << "simulation aborted: " << log.diagnostic << "\n";
    return 1;
  }
  std::cout << "wrote " << out_dir << "/trajectory.csv, constraints.csv, summary.json\n";
  return 0;
}

int run_benchmark(const std::string& config_path, const std::string& out_dir,
                  const std::vector<int>& n_list, int steps) {
  Scenario tmpl =
      config_path.empty() ? Scenario::demo_quad() : parse_config(config_path);
  std::filesystem::create_directories(out_dir);
  const auto rows = benchmark(n_list, steps, tmpl, env_threads());
  write_timings_csv(rows, out_dir + "/timings.csv");

  std::cout << "cpu: " << cpu_model_string() << "\n";
  std::cout << "n    min[ms]   p25[ms]   med[ms]   p75[ms]   max[ms]  status\n";
  bool all_ok = true;
  for (const auto& r : rows) {
    std::printf("%-3d %8.3f  %8.3f  %8.3f  %8.3f  %8.3f  %s\n", r.n_uav,
                r.quantile_total_ms(0.0), r.quantile_total_ms(0.25),
                r.quantile_total_ms(0.5), r.quantile_total_ms(0.75),
                r.quantile_total_ms(1.0), r.ok ? "ok" : r.diagnostic.c_str());
    all_ok = all_ok && r.ok;
  }
  std::cout << "wrote " << out_dir << "/timings.csv\n";
  return all_ok ? 0 : 1;
}

int run_check(const std::string& config_path, const std::string& trajectory_path,
              double tol, int verbosity) {
  const Scenario s = parse_config(config_path);
  const auto steps = read_trajectory_csv(trajectory_path, s.cfg.n);
  long violations = 0;
  double worst = 0.0;
  std::string worst_label;
  double worst_t = 0.0;
  for (const auto& step : steps) {
    const ConstraintReport rep = evaluate_all(step.state, step.input, s.cfg);
    for (const auto& row : rep.rows) {
      if (!(row.margin >= -tol)) {
        ++violations;
        if (row.margin < worst) {
          worst = row.margin;
          worst_label = row.label;
          worst_t = step.t;
        }
        if (verbosity > 1) {
          std::cout << "t=" << step.t << " " << row.label << " margin=" << row.margin
                    << "\n";
        }
      }
    }
  }
  std::cout << "checked " << steps.size() << " rows, violations beyond tol " << tol
            << ": " << violations << "\n";
  if (violations > 0) {
    std::cout << "worst: " << worst_label << " margin " << worst << " at t=" << worst_t
              << "\n";
    return 2;
  }
  return 0;
}

int run_validate(const std::string& config_path) {
  const Scenario s = parse_config(config_path);
  std::cout << "config ok: n=" << s.cfg.n << " duration=" << s.duration
            << "s horizon=" << s.horizon << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NMPC for full-pose manipulation of a cable-suspended load by n UAVs"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::string n_csv = "2,4,6,8,10";
  std::string trajectory_path;
  int n_override = 0, horizon_override = 0, steps = 50, verbosity = 1;
  double duration_override = 0, dt_override = 0, tol = 0.0;
  int seed = 0;

  auto* sim = app.add_subcommand("simulate", "closed-loop run, writes csv + summary");
  sim->add_option("--config", config_path, "scenario config file")->required();
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--n", n_override, "override UAV count (regular polygon layout)");
  sim->add_option("--duration", duration_override, "override duration [s]");
  sim->add_option("--horizon", horizon_override, "override shooting horizon N");
  sim->add_option("--dt", dt_override, "override control period [s]");
  sim->add_option("--seed", seed, "seed recorded for randomized tooling");
  sim->add_option("-v,--verbosity", verbosity, "0..2");

  auto* bench = app.add_subcommand("benchmark", "per-n solver timing sweep");
  bench->add_option("--config", config_path, "template config (default: built-in demo)");
  bench->add_option("--out", out_dir, "output directory");
  bench->add_option("--n", n_csv, "comma-separated UAV counts");
  bench->add_option("--steps", steps, "RTI steps per n");

  auto* check = app.add_subcommand("check-constraints",
                                   "replay a trajectory.csv through the evaluators");
  check->add_option("--config", config_path, "scenario config file")->required();
  check->add_option("--trajectory", trajectory_path, "trajectory.csv path")->required();
  check->add_option("--tol", tol, "absolute margin tolerance");
  check->add_option("-v,--verbosity", verbosity, "0..2");

  auto* validate = app.add_subcommand("validate-config", "parse and check a config");
  validate->add_option("--config", config_path, "scenario config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) {
      return run_simulate(config_path, out_dir, n_override, duration_override,
                          horizon_override, dt_override, verbosity);
    }
    if (bench->parsed()) {
      std::vector<int> n_list;
      std::stringstream ss(n_csv);
      std::string item;
      while (std::getline(ss, item, ',')) n_list.push_back(std::stoi(item));
      return run_benchmark(config_path, out_dir, n_list, steps);
    }
    if (check->parsed()) {
      return run_check(config_path, trajectory_path, tol, verbosity);
    }
    if (validate->parsed()) {
      return run_validate(config_path);
    }
  } catch (const ParseError& e) {
    std::cerr << "config error";
    if (e.line > 0) std::cerr << " (line " << e.line << ")";
    std::cerr << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
