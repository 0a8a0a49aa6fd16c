#include "cablelift/config_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace cablelift {

namespace {

// ---- minimal TOML subset: [section], key = value, #-comments, values are
// numbers, booleans, strings, and (nested) arrays that may span lines -------

struct Value {
  enum class Kind { Number, Bool, String, Array } kind = Kind::Number;
  double num = 0.0;
  bool boolean = false;
  std::string str;
  std::vector<Value> arr;
  int line = 0;
};

using Section = std::map<std::string, Value>;
using Table = std::map<std::string, Section>;

struct Cursor {
  const std::string& text;
  size_t pos = 0;
  int line = 1;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  void advance() {
    if (text[pos] == '\n') ++line;
    ++pos;
  }
  void skip_ws_and_comments(bool stop_at_newline) {
    while (!done()) {
      const char c = peek();
      if (c == '#') {
        while (!done() && peek() != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (c == '\n' && !stop_at_newline) {
        advance();
      } else {
        break;
      }
    }
  }
};

[[noreturn]] void fail(const std::string& what, int line) { throw ParseError(what, line); }

Value parse_value(Cursor& c);

Value parse_array(Cursor& c) {
  Value v;
  v.kind = Value::Kind::Array;
  v.line = c.line;
  c.advance();  // '['
  while (true) {
    c.skip_ws_and_comments(false);
    if (c.done()) fail("unterminated array", v.line);
    if (c.peek() == ']') {
      c.advance();
      break;
    }
    v.arr.push_back(parse_value(c));
    c.skip_ws_and_comments(false);
    if (c.done()) fail("unterminated array", v.line);
    if (c.peek() == ',') {
      c.advance();
    } else if (c.peek() != ']') {
      fail("expected ',' or ']' in array", c.line);
    }
  }
  return v;
}

Value parse_value(Cursor& c) {
  c.skip_ws_and_comments(false);
  if (c.done()) fail("expected a value", c.line);
  Value v;
  v.line = c.line;
  const char ch = c.peek();
  if (ch == '[') return parse_array(c);
  if (ch == '"') {
    v.kind = Value::Kind::String;
    c.advance();
    while (!c.done() && c.peek() != '"') {
      if (c.peek() == '\n') fail("unterminated string", v.line);
      v.str.push_back(c.peek());
      c.advance();
    }
    if (c.done()) fail("unterminated string", v.line);
    c.advance();
    return v;
  }
  std::string tok;
  while (!c.done()) {
    const char t = c.peek();
    if (t == ',' || t == ']' || t == '\n' || t == ' ' || t == '\t' || t == '#' ||
        t == '\r') {
      break;
    }
    tok.push_back(t);
    c.advance();
  }
  if (tok == "true" || tok == "false") {
    v.kind = Value::Kind::Bool;
    v.boolean = tok == "true";
    return v;
  }
  char* end = nullptr;
  v.num = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size()) {
    fail("cannot parse value '" + tok + "'", v.line);
  }
  v.kind = Value::Kind::Number;
  return v;
}

Table parse_table(const std::string& text) {
  Table table;
  Cursor c{text};
  std::string section;
  while (true) {
    c.skip_ws_and_comments(false);
    if (c.done()) break;
    if (c.peek() == '[') {
      const int line = c.line;
      c.advance();
      section.clear();
      while (!c.done() && c.peek() != ']' && c.peek() != '\n') {
        section.push_back(c.peek());
        c.advance();
      }
      if (c.done() || c.peek() != ']') fail("unterminated section header", line);
      c.advance();
      if (section.empty()) fail("empty section name", line);
      table[section];  // sections may be empty
      continue;
    }
    // key = value
    const int line = c.line;
    std::string key;
    while (!c.done() && c.peek() != '=' && c.peek() != '\n' && c.peek() != ' ' &&
           c.peek() != '\t') {
      key.push_back(c.peek());
      c.advance();
    }
    c.skip_ws_and_comments(true);
    if (key.empty() || c.done() || c.peek() != '=') {
      fail("expected 'key = value'", line);
    }
    c.advance();  // '='
    Value v = parse_value(c);
    v.line = line;
    if (section.empty()) fail("key '" + key + "' outside any [section]", line);
    if (table[section].count(key)) fail("duplicate key '" + key + "'", line);
    table[section][key] = std::move(v);
  }
  return table;
}

// ---- schema helpers --------------------------------------------------------

struct Reader {
  Table table;
  std::set<std::string> used;
  std::vector<std::string> missing;

  bool has(const std::string& sec, const std::string& key) const {
    const auto s = table.find(sec);
    return s != table.end() && s->second.count(key);
  }

  const Value* get(const std::string& sec, const std::string& key) {
    const auto s = table.find(sec);
    if (s == table.end()) return nullptr;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    used.insert(sec + "." + key);
    return &k->second;
  }

  const Value& require(const std::string& sec, const std::string& key) {
    const Value* v = get(sec, key);
    if (!v) {
      missing.push_back(sec + "." + key);
      static const Value dummy{};
      return dummy;
    }
    return *v;
  }

  void finish() const {
    if (!missing.empty()) {
      std::string what = "missing required config keys:";
      for (const auto& m : missing) what += " " + m;
      throw ParseError(what, 0);
    }
    for (const auto& [sec, keys] : table) {
      for (const auto& [key, v] : keys) {
        if (!used.count(sec + "." + key)) {
          fail("unknown key '" + sec + "." + key + "'", v.line);
        }
      }
    }
  }
};

double as_number(const Value& v, const std::string& path) {
  if (v.kind != Value::Kind::Number) fail(path + ": expected a number", v.line);
  return v.num;
}

int as_int(const Value& v, const std::string& path) {
  const double d = as_number(v, path);
  if (std::abs(d - std::round(d)) > 1e-9) fail(path + ": expected an integer", v.line);
  return static_cast<int>(std::llround(d));
}

bool as_bool(const Value& v, const std::string& path) {
  if (v.kind != Value::Kind::Bool) fail(path + ": expected true/false", v.line);
  return v.boolean;
}

std::string as_string(const Value& v, const std::string& path) {
  if (v.kind != Value::Kind::String) fail(path + ": expected a string", v.line);
  return v.str;
}

VecXd as_vector(const Value& v, const std::string& path, int expected = -1) {
  if (v.kind != Value::Kind::Array) fail(path + ": expected an array", v.line);
  VecXd out(v.arr.size());
  for (size_t i = 0; i < v.arr.size(); ++i) {
    out(static_cast<int>(i)) = as_number(v.arr[i], path);
  }
  if (expected >= 0 && out.size() != expected) {
    fail(path + ": expected " + std::to_string(expected) + " entries", v.line);
  }
  return out;
}

/// Scalar broadcast or per-UAV array.
VecXd as_per_uav(const Value& v, const std::string& path, int n) {
  if (v.kind == Value::Kind::Number) return VecXd::Constant(n, v.num);
  return as_vector(v, path, n);
}

Vec3d as_vec3(const Value& v, const std::string& path) {
  return Vec3d(as_vector(v, path, 3));
}

/// Config quaternions are scalar-last [x, y, z, w]; internal storage is
/// scalar-first.
Quatd as_quat(const Value& v, const std::string& path) {
  const VecXd q = as_vector(v, path, 4);
  return Quatd(q(3), q(0), q(1), q(2));
}

Eigen::Matrix3Xd as_points(const Value& v, const std::string& path, int n) {
  if (v.kind != Value::Kind::Array) fail(path + ": expected an array of points", v.line);
  if (static_cast<int>(v.arr.size()) != n) {
    fail(path + ": expected " + std::to_string(n) + " points", v.line);
  }
  Eigen::Matrix3Xd out(3, n);
  for (int i = 0; i < n; ++i) out.col(i) = as_vec3(v.arr[i], path);
  return out;
}

}  // namespace

Scenario parse_config_string(const std::string& text) {
  Reader r{parse_table(text)};
  Scenario s;

  const int n = r.has("system", "n") ? as_int(r.require("system", "n"), "system.n") : 0;
  const Value& load_mass = r.require("system", "load_mass");
  const Value& uav_mass = r.require("system", "uav_mass");
  const Value& cable_length = r.require("system", "cable_length");
  const Value& attachment = r.require("system", "attachment");
  const Value& ref_p = r.require("reference", "p");
  const Value& ref_q = r.require("reference", "q");
  const Value& ref_t = r.require("reference", "tension");
  const Value& duration = r.require("simulation", "duration");
  const Value& control_period = r.require("simulation", "control_period");
  if (!r.has("system", "n")) r.missing.push_back("system.n");
  if (!r.missing.empty()) r.finish();

  SystemConfig& cfg = s.cfg;
  cfg.n = n;
  if (n < 1) fail("system.n: need at least 1 UAV", 0);
  cfg.load_mass = as_number(load_mass, "system.load_mass");
  cfg.uav_mass = as_per_uav(uav_mass, "system.uav_mass", n);
  cfg.cable_length = as_per_uav(cable_length, "system.cable_length", n);
  cfg.attachment = as_points(attachment, "system.attachment", n);
  if (const Value* v = r.get("system", "inertia_diag")) {
    cfg.inertia = Vec3d(as_vector(*v, "system.inertia_diag", 3)).asDiagonal();
  } else {
    cfg.inertia = Vec3d(0.5, 0.5, 0.9).asDiagonal();
  }
  if (const Value* v = r.get("system", "inertia")) {
    const VecXd m = as_vector(*v, "system.inertia", 9);
    cfg.inertia = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(m.data());
  }
  if (const Value* v = r.get("system", "gravity")) {
    cfg.gravity = as_vec3(*v, "system.gravity");
  }
  if (const Value* v = r.get("system", "distance_variant")) {
    const std::string name = as_string(*v, "system.distance_variant");
    if (name == "cable_line") {
      cfg.distance_variant = DistanceVariant::CableLine;
    } else if (name == "paper_own_direction") {
      cfg.distance_variant = DistanceVariant::PaperOwnDirection;
    } else {
      fail("system.distance_variant: expected cable_line or paper_own_direction",
           v->line);
    }
  }

  ConstraintBounds& b = cfg.bounds;
  b = ConstraintBounds::defaults(n);
  if (const Value* v = r.get("bounds", "f_min")) b.f_min = as_per_uav(*v, "bounds.f_min", n);
  if (const Value* v = r.get("bounds", "f_max")) b.f_max = as_per_uav(*v, "bounds.f_max", n);
  if (const Value* v = r.get("bounds", "t_min")) b.t_min = as_per_uav(*v, "bounds.t_min", n);
  if (const Value* v = r.get("bounds", "t_max")) b.t_max = as_per_uav(*v, "bounds.t_max", n);
  if (const Value* v = r.get("bounds", "s_z_max")) {
    b.s_z_max = as_per_uav(*v, "bounds.s_z_max", n);
  }
  if (const Value* v = r.get("bounds", "sigma_max")) {
    b.sigma_max = as_per_uav(*v, "bounds.sigma_max", n);
  }
  if (const Value* v = r.get("bounds", "d_min")) b.d_min = as_number(*v, "bounds.d_min");
  if (const Value* v = r.get("bounds", "c_max")) b.c_max = as_number(*v, "bounds.c_max");

  try {
    cfg.validate();
  } catch (const InvalidConfiguration& e) {
    throw ParseError(e.what(), 0);
  }

  s.initial_state = LoadCableState(n);
  if (const Value* v = r.get("initial", "p")) {
    s.initial_state.position() = as_vec3(*v, "initial.p");
  }
  if (const Value* v = r.get("initial", "v")) {
    s.initial_state.velocity() = as_vec3(*v, "initial.v");
  }
  if (const Value* v = r.get("initial", "q")) {
    s.initial_state.quaternion() = as_quat(*v, "initial.q");
  }
  if (const Value* v = r.get("initial", "omega")) {
    s.initial_state.angular_velocity() = as_vec3(*v, "initial.omega");
  }
  if (const Value* v = r.get("initial", "cable_dir")) {
    const auto pts = as_points(*v, "initial.cable_dir", n);
    for (int i = 0; i < n; ++i) s.initial_state.cable_dir(i) = pts.col(i);
  }
  if (const Value* v = r.get("initial", "cable_rate")) {
    const auto pts = as_points(*v, "initial.cable_rate", n);
    for (int i = 0; i < n; ++i) s.initial_state.cable_rate(i) = pts.col(i);
  }
  if (const Value* v = r.get("initial", "cable_rate_dot")) {
    const auto pts = as_points(*v, "initial.cable_rate_dot", n);
    for (int i = 0; i < n; ++i) s.initial_state.cable_rate_dot(i) = pts.col(i);
  }
  try {
    s.initial_state.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("initial state: ") + e.what(), 0);
  }

  s.p_ref = as_vec3(ref_p, "reference.p");
  s.q_ref = as_quat(ref_q, "reference.q");
  const double qn = Quatd(s.q_ref).norm();
  if (qn < 1e-6) fail("reference.q: zero quaternion", ref_q.line);
  s.q_ref = Quatd(s.q_ref) / qn;  // normalized on load
  s.tension_ref = as_per_uav(ref_t, "reference.tension", n);
  s.heading_ref = VecXd::Zero(n);
  if (const Value* v = r.get("reference", "heading")) {
    s.heading_ref = as_per_uav(*v, "reference.heading", n);
  }

  s.duration = as_number(duration, "simulation.duration");
  s.control_period = as_number(control_period, "simulation.control_period");
  if (const Value* v = r.get("simulation", "substep")) {
    s.substep = as_number(*v, "simulation.substep");
  }
  if (const Value* v = r.get("simulation", "name")) {
    s.name = as_string(*v, "simulation.name");
  }

  OcpWeights& w = s.weights;
  const auto vec3_weight = [&](const char* key, Vec3d& dst) {
    if (const Value* v = r.get("weights", key)) {
      dst = Vec3d(as_vector(*v, std::string("weights.") + key, 3));
    }
  };
  vec3_weight("q_p", w.q_p);
  vec3_weight("q_v", w.q_v);
  vec3_weight("q_q", w.q_q);
  vec3_weight("q_w", w.q_w);
  vec3_weight("q_s", w.q_s);
  vec3_weight("q_r", w.q_r);
  vec3_weight("q_rdot", w.q_rdot);
  vec3_weight("r_c", w.r_c);
  if (const Value* v = r.get("weights", "r_t")) w.r_t = as_number(*v, "weights.r_t");
  bool any_terminal = false;
  const auto vec3_terminal = [&](const char* key, Vec3d& dst) {
    if (const Value* v = r.get("weights", key)) {
      dst = Vec3d(as_vector(*v, std::string("weights.") + key, 3));
      any_terminal = true;
    }
  };
  w.terminal_set = false;
  w.sync_terminal();
  vec3_terminal("q_p_e", w.q_p_e);
  vec3_terminal("q_v_e", w.q_v_e);
  vec3_terminal("q_q_e", w.q_q_e);
  vec3_terminal("q_w_e", w.q_w_e);
  vec3_terminal("q_s_e", w.q_s_e);
  vec3_terminal("q_r_e", w.q_r_e);
  vec3_terminal("q_rdot_e", w.q_rdot_e);
  w.terminal_set = any_terminal;

  static const char* kFamilies[] = {"thrust",    "tension", "cable_load",
                                    "cable_uav", "dist",    "input_box"};
  if (const Value* v = r.get("weights", "slack_l1")) {
    const double l1 = as_number(*v, "weights.slack_l1");
    for (auto& sw : w.slack) sw.l1 = l1;
  }
  if (const Value* v = r.get("weights", "slack_l2")) {
    const double l2 = as_number(*v, "weights.slack_l2");
    for (auto& sw : w.slack) sw.l2 = l2;
  }
  for (int f = 0; f < kNumConstraintFamilies; ++f) {
    if (const Value* v = r.get("weights", std::string("slack_l1_") + kFamilies[f])) {
      w.slack[f].l1 = as_number(*v, "weights.slack_l1_*");
    }
    if (const Value* v = r.get("weights", std::string("slack_l2_") + kFamilies[f])) {
      w.slack[f].l2 = as_number(*v, "weights.slack_l2_*");
    }
  }

  SolverSettings& sol = s.solver;
  if (const Value* v = r.get("solver", "horizon")) {
    s.horizon = as_int(*v, "solver.horizon");
  }
  if (const Value* v = r.get("solver", "max_sqp_iterations")) {
    sol.max_sqp_iterations = as_int(*v, "solver.max_sqp_iterations");
  }
  if (const Value* v = r.get("solver", "qp_tolerance")) {
    sol.qp_tolerance = as_number(*v, "solver.qp_tolerance");
  }
  if (const Value* v = r.get("solver", "eps_reg")) {
    sol.eps_reg = as_number(*v, "solver.eps_reg");
  }
  if (const Value* v = r.get("solver", "line_search")) {
    sol.line_search = as_bool(*v, "solver.line_search");
  }
  if (const Value* v = r.get("solver", "warm_start")) {
    sol.warm_start = as_bool(*v, "solver.warm_start");
  }
  if (const Value* v = r.get("solver", "max_qp_iterations")) {
    sol.max_qp_iterations = as_int(*v, "solver.max_qp_iterations");
  }

  r.finish();
  try {
    s.validate();
  } catch (const InvalidConfiguration& e) {
    throw ParseError(e.what(), 0);
  }
  return s;
}

Scenario parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str());
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string vec_str(const Eigen::Ref<const VecXd>& v) {
  std::string s = "[";
  for (int i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += num(v(i));
  }
  return s + "]";
}

std::string points_str(const Eigen::Matrix3Xd& m) {
  std::string s = "[";
  for (int i = 0; i < m.cols(); ++i) {
    if (i) s += ", ";
    s += vec_str(m.col(i));
  }
  return s + "]";
}

std::string quat_str_scalar_last(const Quatd& q) {
  VecXd v(4);
  v << q(1), q(2), q(3), q(0);
  return vec_str(v);
}

}  // namespace

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  const int n = s.cfg.n;
  const Eigen::Matrix<double, 3, 3, Eigen::RowMajor> inertia_rm = s.cfg.inertia;
  out << "[system]\n";
  out << "n = " << n << "\n";
  out << "load_mass = " << num(s.cfg.load_mass) << "\n";
  out << "uav_mass = " << vec_str(s.cfg.uav_mass) << "\n";
  out << "cable_length = " << vec_str(s.cfg.cable_length) << "\n";
  out << "attachment = " << points_str(s.cfg.attachment) << "\n";
  out << "inertia = "
      << vec_str(Eigen::Map<const VecXd>(inertia_rm.data(), 9)) << "\n";
  out << "gravity = " << vec_str(s.cfg.gravity) << "\n";
  out << "distance_variant = "
      << (s.cfg.distance_variant == DistanceVariant::CableLine ? "\"cable_line\""
                                                               : "\"paper_own_direction\"")
      << "\n";
  out << "\n[bounds]\n";
  out << "f_min = " << vec_str(s.cfg.bounds.f_min) << "\n";
  out << "f_max = " << vec_str(s.cfg.bounds.f_max) << "\n";
  out << "t_min = " << vec_str(s.cfg.bounds.t_min) << "\n";
  out << "t_max = " << vec_str(s.cfg.bounds.t_max) << "\n";
  out << "s_z_max = " << vec_str(s.cfg.bounds.s_z_max) << "\n";
  out << "sigma_max = " << vec_str(s.cfg.bounds.sigma_max) << "\n";
  out << "d_min = " << num(s.cfg.bounds.d_min) << "\n";
  out << "c_max = " << num(s.cfg.bounds.c_max) << "\n";

  out << "\n[initial]\n";
  out << "p = " << vec_str(s.initial_state.position()) << "\n";
  out << "v = " << vec_str(s.initial_state.velocity()) << "\n";
  out << "q = " << quat_str_scalar_last(s.initial_state.quat()) << "\n";
  out << "omega = " << vec_str(s.initial_state.angular_velocity()) << "\n";
  Eigen::Matrix3Xd dirs(3, n), rates(3, n), rate_dots(3, n);
  for (int i = 0; i < n; ++i) {
    dirs.col(i) = s.initial_state.cable_dir(i);
    rates.col(i) = s.initial_state.cable_rate(i);
    rate_dots.col(i) = s.initial_state.cable_rate_dot(i);
  }
  out << "cable_dir = " << points_str(dirs) << "\n";
  out << "cable_rate = " << points_str(rates) << "\n";
  out << "cable_rate_dot = " << points_str(rate_dots) << "\n";

  out << "\n[reference]\n";
  out << "p = " << vec_str(s.p_ref) << "\n";
  out << "q = " << quat_str_scalar_last(Quatd(s.q_ref)) << "\n";
  out << "tension = " << vec_str(s.tension_ref) << "\n";
  out << "heading = " << vec_str(s.heading_ref) << "\n";

  out << "\n[simulation]\n";
  out << "duration = " << num(s.duration) << "\n";
  out << "control_period = " << num(s.control_period) << "\n";
  out << "substep = " << num(s.substep) << "\n";
  out << "name = \"" << s.name << "\"\n";

  const auto& w = s.weights;
  out << "\n[weights]\n";
  out << "q_p = " << vec_str(w.q_p) << "\n";
  out << "q_v = " << vec_str(w.q_v) << "\n";
  out << "q_q = " << vec_str(w.q_q) << "\n";
  out << "q_w = " << vec_str(w.q_w) << "\n";
  out << "q_s = " << vec_str(w.q_s) << "\n";
  out << "q_r = " << vec_str(w.q_r) << "\n";
  out << "q_rdot = " << vec_str(w.q_rdot) << "\n";
  out << "r_c = " << vec_str(w.r_c) << "\n";
  out << "r_t = " << num(w.r_t) << "\n";
  if (w.terminal_set) {
    out << "q_p_e = " << vec_str(w.q_p_e) << "\n";
    out << "q_v_e = " << vec_str(w.q_v_e) << "\n";
    out << "q_q_e = " << vec_str(w.q_q_e) << "\n";
    out << "q_w_e = " << vec_str(w.q_w_e) << "\n";
    out << "q_s_e = " << vec_str(w.q_s_e) << "\n";
    out << "q_r_e = " << vec_str(w.q_r_e) << "\n";
    out << "q_rdot_e = " << vec_str(w.q_rdot_e) << "\n";
  }
  static const char* kFamilies[] = {"thrust",    "tension", "cable_load",
                                    "cable_uav", "dist",    "input_box"};
  for (int f = 0; f < kNumConstraintFamilies; ++f) {
    out << "slack_l1_" << kFamilies[f] << " = " << num(w.slack[f].l1) << "\n";
    out << "slack_l2_" << kFamilies[f] << " = " << num(w.slack[f].l2) << "\n";
  }

  out << "\n[solver]\n";
  out << "horizon = " << s.horizon << "\n";
  out << "max_sqp_iterations = " << s.solver.max_sqp_iterations << "\n";
  out << "qp_tolerance = " << num(s.solver.qp_tolerance) << "\n";
  out << "eps_reg = " << num(s.solver.eps_reg) << "\n";
  out << "line_search = " << (s.solver.line_search ? "true" : "false") << "\n";
  out << "warm_start = " << (s.solver.warm_start ? "true" : "false") << "\n";
  out << "max_qp_iterations = " << s.solver.max_qp_iterations << "\n";
  return out.str();
}

void save_config(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  out << serialize_scenario(s);
}

bool scenario_equal(const Scenario& a, const Scenario& b) {
  const auto meq = [](const auto& x, const auto& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() &&
           (x.array() == y.array()).all();
  };
  if (a.cfg.n != b.cfg.n || a.cfg.load_mass != b.cfg.load_mass) return false;
  if (!meq(a.cfg.inertia, b.cfg.inertia)) return false;
  if (!meq(a.cfg.uav_mass, b.cfg.uav_mass)) return false;
  if (!meq(a.cfg.cable_length, b.cfg.cable_length)) return false;
  if (!meq(a.cfg.attachment, b.cfg.attachment)) return false;
  if (!meq(a.cfg.gravity, b.cfg.gravity)) return false;
  if (a.cfg.distance_variant != b.cfg.distance_variant) return false;
  const auto& ba = a.cfg.bounds;
  const auto& bb = b.cfg.bounds;
  if (!meq(ba.f_min, bb.f_min) || !meq(ba.f_max, bb.f_max) || !meq(ba.t_min, bb.t_min) ||
      !meq(ba.t_max, bb.t_max) || !meq(ba.s_z_max, bb.s_z_max) ||
      !meq(ba.sigma_max, bb.sigma_max) || ba.d_min != bb.d_min || ba.c_max != bb.c_max) {
    return false;
  }
  if (!(a.initial_state == b.initial_state)) return false;
  if (!meq(a.p_ref, b.p_ref) || !meq(Quatd(a.q_ref), Quatd(b.q_ref))) return false;
  if (!meq(a.tension_ref, b.tension_ref) || !meq(a.heading_ref, b.heading_ref)) {
    return false;
  }
  if (a.duration != b.duration || a.control_period != b.control_period ||
      a.substep != b.substep || a.horizon != b.horizon || a.name != b.name) {
    return false;
  }
  const auto& wa = a.weights;
  const auto& wb = b.weights;
  if (!meq(wa.q_p, wb.q_p) || !meq(wa.q_v, wb.q_v) || !meq(wa.q_q, wb.q_q) ||
      !meq(wa.q_w, wb.q_w) || !meq(wa.q_s, wb.q_s) || !meq(wa.q_r, wb.q_r) ||
      !meq(wa.q_rdot, wb.q_rdot) || !meq(wa.r_c, wb.r_c) || wa.r_t != wb.r_t) {
    return false;
  }
  if (!meq(wa.q_p_e, wb.q_p_e) || !meq(wa.q_v_e, wb.q_v_e) || !meq(wa.q_q_e, wb.q_q_e) ||
      !meq(wa.q_w_e, wb.q_w_e) || !meq(wa.q_s_e, wb.q_s_e) || !meq(wa.q_r_e, wb.q_r_e) ||
      !meq(wa.q_rdot_e, wb.q_rdot_e)) {
    return false;
  }
  for (int f = 0; f < kNumConstraintFamilies; ++f) {
    if (wa.slack[f].l1 != wb.slack[f].l1 || wa.slack[f].l2 != wb.slack[f].l2) {
      return false;
    }
  }
  const auto& sa = a.solver;
  const auto& sb = b.solver;
  return sa.max_sqp_iterations == sb.max_sqp_iterations &&
         sa.qp_tolerance == sb.qp_tolerance && sa.eps_reg == sb.eps_reg &&
         sa.line_search == sb.line_search && sa.warm_start == sb.warm_start &&
         sa.max_qp_iterations == sb.max_qp_iterations;
}

}  // namespace cablelift
