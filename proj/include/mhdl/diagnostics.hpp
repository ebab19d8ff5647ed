#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mhdl/energy.hpp"

namespace mhdl {

struct DiagnosticsRow {
  double t = 0;
  EnergyReport energy;
  double tilde_E = 0;
  double ledger_lhs = std::numeric_limits<double>::quiet_NaN();
  double ledger_rhs = std::numeric_limits<double>::quiet_NaN();
  int ledger_pass = -1;  // -1: not evaluated
  double det_drift_max = 0;
  int pressure_iters = 0;
  double contraction_est = 0;
  double grad_u_linf = 0;
  double grad_u_l1t = 0;
};

inline std::string diagnostics_header() {
  std::string h = "t";
  for (const char* n : energy_component_names()) h += std::string(",") + n;
  for (const char* n : dissipation_component_names()) h += std::string(",") + n;
  h += ",E_total,D_total,script_E,tilde_E,ledger_lhs,ledger_rhs,ledger_pass,det_drift_max,pressure_iters,"
       "contraction_est,grad_u_linf,grad_u_l1t";
  return h;
}

namespace diag {
inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
}  // namespace diag

inline std::string diagnostics_line(const DiagnosticsRow& r) {
  std::string s = diag::num(r.t);
  for (double x : r.energy.E) s += "," + diag::num(x);
  for (double x : r.energy.D) s += "," + diag::num(x);
  for (double x : {r.energy.E_total, r.energy.D_total, r.energy.script_E, r.tilde_E, r.ledger_lhs, r.ledger_rhs})
    s += "," + diag::num(x);
  s += "," + (r.ledger_pass < 0 ? std::string("nan") : std::to_string(r.ledger_pass));
  s += "," + diag::num(r.det_drift_max) + "," + std::to_string(r.pressure_iters) + "," + diag::num(r.contraction_est) +
       "," + diag::num(r.grad_u_linf) + "," + diag::num(r.grad_u_l1t);
  return s;
}

inline void write_diagnostics(const std::string& path, const std::vector<DiagnosticsRow>& rows) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot open diagnostics file '" + path + "'");
  f << diagnostics_header() << '\n';
  for (const auto& r : rows) f << diagnostics_line(r) << '\n';
  if (!f) throw Error("write to '" + path + "' failed");
}

// Reads back (t, column) pairs from a diagnostics CSV.
inline std::vector<std::pair<double, double>> read_diagnostics_column(const std::string& path, const std::string& column) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open diagnostics file '" + path + "'");
  std::string line;
  if (!std::getline(f, line)) throw FormatError("diagnostics file '" + path + "' is empty");
  std::vector<std::string> head;
  {
    std::istringstream is(line);
    for (std::string c; std::getline(is, c, ',');) head.push_back(c);
  }
  std::size_t col = head.size();
  for (std::size_t i = 0; i < head.size(); ++i)
    if (head[i] == column) col = i;
  if (col == head.size()) throw InvalidArgument("column '" + column + "' not in " + path);
  if (head.empty() || head[0] != "t") throw FormatError("first diagnostics column must be t");
  std::vector<std::pair<double, double>> out;
  int ln = 1;
  while (std::getline(f, line)) {
    ++ln;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream is(line);
    for (std::string c; std::getline(is, c, ',');) cells.push_back(c);
    if (cells.size() != head.size()) throw FormatError("row " + std::to_string(ln) + " has wrong column count");
    out.emplace_back(std::stod(cells[0]), std::stod(cells[col]));
  }
  return out;
}

}  // namespace mhdl
