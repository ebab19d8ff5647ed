#pragma once

#include <charconv>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>

#include "mhdl/initial_data.hpp"

namespace mhdl {

enum class SolverKind { Lagrangian, Eulerian, Both };
enum class InitKind { Random, Modes, Zero, Checkpoint };

struct RunConfig {
  int dimension = 3;
  std::array<int, 3> sizes{0, 0, 1};
  std::array<double, 3> lengths{2 * pi, 2 * pi, 2 * pi};
  double dt = 0;
  double t_end = 0;
  double cadence = 0;  // 0 means dt
  SolverKind solver = SolverKind::Lagrangian;
  InitKind init = InitKind::Random;
  std::vector<ModeSpec> init_modes;
  int init_max_mode = 2;
  int init_mode_count = 8;
  std::string init_checkpoint;
  double epsilon0 = 1e-4;
  std::optional<double> init_scale;  // bypasses epsilon0 rescaling
  double pressure_tol = 1e-10;
  int pressure_max_iter = 50;
  bool dealias = true;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  std::string diagnostics_file = "diagnostics.csv";
  std::string checkpoint_file = "checkpoint.bin";
  double energy_cap = 3.0;
  int flow_substeps = 32;

  Grid grid() const {
    return Grid(dimension, {sizes[0], sizes[1], dimension == 3 ? sizes[2] : 1},
                {lengths[0], lengths[1], dimension == 3 ? lengths[2] : 1.0});
  }
  double sample_cadence() const { return cadence > 0 ? cadence : dt; }
  long steps() const { return std::lround(t_end / dt); }
  long steps_per_sample() const { return std::lround(sample_cadence() / dt); }
};

inline const char* solver_name(SolverKind s) {
  switch (s) {
    case SolverKind::Lagrangian: return "lagrangian";
    case SolverKind::Eulerian: return "eulerian";
    default: return "both";
  }
}

inline const char* init_name(InitKind k) {
  switch (k) {
    case InitKind::Random: return "random";
    case InitKind::Modes: return "modes";
    case InitKind::Zero: return "zero";
    default: return "checkpoint";
  }
}

namespace cfg {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

inline double number(const std::string& v, int line, const std::string& key) {
  std::string s = trim(v);
  double mult = 1.0;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    mult = pi;
    s = trim(s.substr(0, s.size() - 2));
    if (s.empty()) return pi;
    if (s.back() == '*') s = trim(s.substr(0, s.size() - 1));
  }
  double x = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(x))
    throw ParseError(line, "malformed number for '" + key + "': '" + v + "'");
  return x * mult;
}

inline long integer(const std::string& v, int line, const std::string& key) {
  const std::string s = trim(v);
  long x = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ParseError(line, "malformed integer for '" + key + "': '" + v + "'");
  return x;
}

inline bool boolean(const std::string& v, int line, const std::string& key) {
  const std::string s = trim(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ParseError(line, "malformed boolean for '" + key + "': '" + v + "'");
}

inline std::vector<ModeSpec> modes(const std::string& v, int dim, int line) {
  std::vector<ModeSpec> out;
  std::istringstream is(v);
  for (std::string item; std::getline(is, item, ';');) {
    const auto w = split_ws(item);
    if (w.empty()) continue;
    if (int(w.size()) != dim + 2) throw ParseError(line, "init_modes entry '" + trim(item) + "' needs " +
                                                             std::to_string(dim) + " indices, kind and amplitude");
    ModeSpec m;
    for (int a = 0; a < dim; ++a) m.m[a] = int(integer(w[a], line, "init_modes"));
    if (w[dim] == "vel")
      m.velocity = true;
    else if (w[dim] != "disp")
      throw ParseError(line, "init_modes kind must be disp or vel, got '" + w[dim] + "'");
    m.amplitude = number(w[dim + 1], line, "init_modes");
    out.push_back(m);
  }
  return out;
}

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace cfg

inline RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::map<std::string, std::pair<std::string, int>> kv;
  std::istringstream is(text);
  int line = 0;
  for (std::string raw; std::getline(is, raw);) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = cfg::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected key = value");
    const std::string key = cfg::trim(s.substr(0, eq));
    if (kv.count(key)) throw ParseError(line, "duplicate key '" + key + "'");
    kv[key] = {cfg::trim(s.substr(eq + 1)), line};
  }
  static const char* known[] = {"dimension",      "sizes",          "lengths",         "dt",
                                "t_end",          "cadence",        "solver",          "init",
                                "init_modes",     "init_max_mode",  "init_mode_count", "init_checkpoint",
                                "epsilon0",       "init_scale",     "pressure_tol",    "pressure_max_iter",
                                "dealias",        "seed",           "output_dir",      "diagnostics_file",
                                "checkpoint_file", "energy_cap",    "flow_substeps"};
  for (const auto& [k, v] : kv) {
    bool ok = false;
    for (const char* n : known) ok = ok || k == n;
    if (!ok) throw ParseError(v.second, "unknown key '" + k + "'");
  }
  for (const char* req : {"dimension", "sizes", "dt", "t_end"})
    if (!kv.count(req)) throw ParseError(line, std::string("missing required key '") + req + "'");

  auto get = [&](const char* k) -> const std::pair<std::string, int>* {
    auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };
  {
    const auto* v = get("dimension");
    c.dimension = int(cfg::integer(v->first, v->second, "dimension"));
    if (c.dimension != 2 && c.dimension != 3) throw ParseError(v->second, "dimension must be 2 or 3");
  }
  {
    const auto* v = get("sizes");
    const auto w = cfg::split_ws(v->first);
    if (int(w.size()) != c.dimension) throw ParseError(v->second, "sizes needs one entry per dimension");
    for (int a = 0; a < c.dimension; ++a) {
      const long n = cfg::integer(w[a], v->second, "sizes");
      if (n < 4 || (n & (n - 1)) != 0) throw ParseError(v->second, "sizes must be powers of two, at least 4");
      c.sizes[a] = int(n);
    }
  }
  if (const auto* v = get("lengths")) {
    const auto w = cfg::split_ws(v->first);
    if (int(w.size()) != c.dimension) throw ParseError(v->second, "lengths needs one entry per dimension");
    for (int a = 0; a < c.dimension; ++a) {
      c.lengths[a] = cfg::number(w[a], v->second, "lengths");
      if (!(c.lengths[a] > 0)) throw ParseError(v->second, "lengths must be positive");
    }
  }
  {
    const auto* v = get("dt");
    c.dt = cfg::number(v->first, v->second, "dt");
    if (!(c.dt > 0)) throw ParseError(v->second, "dt must be positive");
  }
  {
    const auto* v = get("t_end");
    c.t_end = cfg::number(v->first, v->second, "t_end");
    if (!(c.t_end >= c.dt)) throw ParseError(v->second, "t_end must be at least dt");
    const double r = c.t_end / c.dt;
    if (std::abs(r - std::round(r)) > 1e-9 * r) throw ParseError(v->second, "t_end must be an integer multiple of dt");
  }
  if (const auto* v = get("cadence")) {
    c.cadence = cfg::number(v->first, v->second, "cadence");
    const double r = c.cadence / c.dt;
    if (!(c.cadence > 0) || std::abs(r - std::round(r)) > 1e-9 * r)
      throw ParseError(v->second, "cadence must be a positive multiple of dt");
  }
  if (const auto* v = get("solver")) {
    if (v->first == "lagrangian")
      c.solver = SolverKind::Lagrangian;
    else if (v->first == "eulerian")
      c.solver = SolverKind::Eulerian;
    else if (v->first == "both")
      c.solver = SolverKind::Both;
    else
      throw ParseError(v->second, "solver must be lagrangian, eulerian or both");
  }
  if (const auto* v = get("init")) {
    if (v->first == "random")
      c.init = InitKind::Random;
    else if (v->first == "modes")
      c.init = InitKind::Modes;
    else if (v->first == "zero")
      c.init = InitKind::Zero;
    else if (v->first == "checkpoint")
      c.init = InitKind::Checkpoint;
    else
      throw ParseError(v->second, "init must be random, modes, zero or checkpoint");
  }
  if (const auto* v = get("init_modes")) c.init_modes = cfg::modes(v->first, c.dimension, v->second);
  if (const auto* v = get("init_max_mode")) {
    c.init_max_mode = int(cfg::integer(v->first, v->second, "init_max_mode"));
    if (c.init_max_mode < 1) throw ParseError(v->second, "init_max_mode must be at least 1");
  }
  if (const auto* v = get("init_mode_count")) {
    c.init_mode_count = int(cfg::integer(v->first, v->second, "init_mode_count"));
    if (c.init_mode_count < 1) throw ParseError(v->second, "init_mode_count must be at least 1");
  }
  if (const auto* v = get("init_checkpoint")) c.init_checkpoint = v->first;
  if (const auto* v = get("epsilon0")) {
    c.epsilon0 = cfg::number(v->first, v->second, "epsilon0");
    if (!(c.epsilon0 > 0)) throw ParseError(v->second, "epsilon0 must be positive");
  }
  if (const auto* v = get("init_scale")) {
    c.init_scale = cfg::number(v->first, v->second, "init_scale");
    if (!(*c.init_scale >= 0)) throw ParseError(v->second, "init_scale must be non-negative");
  }
  if (const auto* v = get("pressure_tol")) {
    c.pressure_tol = cfg::number(v->first, v->second, "pressure_tol");
    if (!(c.pressure_tol > 0)) throw ParseError(v->second, "pressure_tol must be positive");
  }
  if (const auto* v = get("pressure_max_iter")) {
    c.pressure_max_iter = int(cfg::integer(v->first, v->second, "pressure_max_iter"));
    if (c.pressure_max_iter < 1) throw ParseError(v->second, "pressure_max_iter must be at least 1");
  }
  if (const auto* v = get("dealias")) c.dealias = cfg::boolean(v->first, v->second, "dealias");
  if (const auto* v = get("seed")) {
    const long s = cfg::integer(v->first, v->second, "seed");
    if (s < 0) throw ParseError(v->second, "seed must be non-negative");
    c.seed = std::uint64_t(s);
  }
  if (const auto* v = get("output_dir")) c.output_dir = v->first;
  if (const auto* v = get("diagnostics_file")) c.diagnostics_file = v->first;
  if (const auto* v = get("checkpoint_file")) c.checkpoint_file = v->first;
  if (const auto* v = get("energy_cap")) {
    c.energy_cap = cfg::number(v->first, v->second, "energy_cap");
    if (!(c.energy_cap > 0)) throw ParseError(v->second, "energy_cap must be positive");
  }
  if (const auto* v = get("flow_substeps")) {
    c.flow_substeps = int(cfg::integer(v->first, v->second, "flow_substeps"));
    if (c.flow_substeps < 1) throw ParseError(v->second, "flow_substeps must be at least 1");
  }
  if (c.init == InitKind::Modes && c.init_modes.empty()) throw ParseError(line, "init = modes needs init_modes");
  if (c.init == InitKind::Checkpoint && c.init_checkpoint.empty())
    throw ParseError(line, "init = checkpoint needs init_checkpoint");
  return c;
}

// Every key written explicitly; parse_config(dump_config(c)) reproduces c.
inline std::string dump_config(const RunConfig& c) {
  std::ostringstream os;
  const int d = c.dimension;
  os << "dimension = " << d << '\n';
  os << "sizes =";
  for (int a = 0; a < d; ++a) os << ' ' << c.sizes[a];
  os << "\nlengths =";
  for (int a = 0; a < d; ++a) os << ' ' << cfg::fmt(c.lengths[a]);
  os << "\ndt = " << cfg::fmt(c.dt) << '\n';
  os << "t_end = " << cfg::fmt(c.t_end) << '\n';
  os << "cadence = " << cfg::fmt(c.sample_cadence()) << '\n';
  os << "solver = " << solver_name(c.solver) << '\n';
  os << "init = " << init_name(c.init) << '\n';
  if (!c.init_modes.empty()) {
    os << "init_modes =";
    for (std::size_t i = 0; i < c.init_modes.size(); ++i) {
      const auto& m = c.init_modes[i];
      os << (i ? "; " : " ");
      for (int a = 0; a < d; ++a) os << m.m[a] << ' ';
      os << (m.velocity ? "vel " : "disp ") << cfg::fmt(m.amplitude);
    }
    os << '\n';
  }
  os << "init_max_mode = " << c.init_max_mode << '\n';
  os << "init_mode_count = " << c.init_mode_count << '\n';
  if (!c.init_checkpoint.empty()) os << "init_checkpoint = " << c.init_checkpoint << '\n';
  os << "epsilon0 = " << cfg::fmt(c.epsilon0) << '\n';
  if (c.init_scale) os << "init_scale = " << cfg::fmt(*c.init_scale) << '\n';
  os << "pressure_tol = " << cfg::fmt(c.pressure_tol) << '\n';
  os << "pressure_max_iter = " << c.pressure_max_iter << '\n';
  os << "dealias = " << (c.dealias ? "true" : "false") << '\n';
  os << "seed = " << c.seed << '\n';
  os << "output_dir = " << c.output_dir << '\n';
  os << "diagnostics_file = " << c.diagnostics_file << '\n';
  os << "checkpoint_file = " << c.checkpoint_file << '\n';
  os << "energy_cap = " << cfg::fmt(c.energy_cap) << '\n';
  os << "flow_substeps = " << c.flow_substeps << '\n';
  return os.str();
}

inline bool operator==(const ModeSpec& a, const ModeSpec& b) {
  return a.m == b.m && a.velocity == b.velocity && a.amplitude == b.amplitude;
}

inline bool same_config(const RunConfig& a, const RunConfig& b) {
  return a.dimension == b.dimension && a.sizes == b.sizes && a.lengths == b.lengths && a.dt == b.dt &&
         a.t_end == b.t_end && a.sample_cadence() == b.sample_cadence() && a.solver == b.solver && a.init == b.init &&
         a.init_modes == b.init_modes && a.init_max_mode == b.init_max_mode &&
         a.init_mode_count == b.init_mode_count && a.init_checkpoint == b.init_checkpoint &&
         a.epsilon0 == b.epsilon0 && a.init_scale == b.init_scale && a.pressure_tol == b.pressure_tol &&
         a.pressure_max_iter == b.pressure_max_iter && a.dealias == b.dealias && a.seed == b.seed &&
         a.output_dir == b.output_dir && a.diagnostics_file == b.diagnostics_file &&
         a.checkpoint_file == b.checkpoint_file && a.energy_cap == b.energy_cap && a.flow_substeps == b.flow_substeps;
}

}  // namespace mhdl
