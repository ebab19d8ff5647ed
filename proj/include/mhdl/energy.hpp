#pragma once

#include "mhdl/force.hpp"

namespace mhdl {

// Weighted quadratic forms of (Y, Yt) read off the spectrum. K = |k|^2, L = k_1^2.
struct QuadraticForms {
  double Yt_H2 = 0, d1Y_H2 = 0, LapY_H2 = 0, gradYt_H2 = 0, gradd1Y_H2 = 0;
  double gradd1Yt_H1 = 0, gradd11Y_H1 = 0, LapYt_H2 = 0, Lapd1Yt_H1 = 0, Lapd1Y_H1 = 0, gradd1Y_H1 = 0;
  double Yt_LapY_H2 = 0;     // (Yt | Lap Y)_{H2}
  double Lapd1Y_d1Yt_H1 = 0; // (Lap d1 Y | d1 Yt)_{H1}
  double d1Yt_H1 = 0;
  double Yt_H3 = 0, d1Y_H3 = 0;
};

inline QuadraticForms quadratic_forms(const VectorSpectrum& Y, const VectorSpectrum& Yt) {
  const Grid& g = Y.grid;
  const auto& t = g.tables();
  const int d = g.dim();
  QuadraticForms f;
  for (std::size_t q = 0; q < g.num_modes(); ++q) {
    double yy = 0, vv = 0, yv = 0;
    for (int i = 0; i < d; ++i) {
      const Complex a = Y.c[i][q], b = Yt.c[i][q];
      yy += std::norm(a);
      vv += std::norm(b);
      yv += a.real() * b.real() + a.imag() * b.imag();
    }
    if (yy == 0 && vv == 0) continue;
    const Vec3 k{t.kappa[0][q], t.kappa[1][q], t.kappa[2][q]};
    const double m = t.weight[q];
    const double K = t.ksq[q], L = k[0] * k[0];
    const double w1 = m * hs_weight(k, d, 1), w2 = m * hs_weight(k, d, 2), w3 = m * hs_weight(k, d, 3);
    f.Yt_H2 += w2 * vv;
    f.d1Y_H2 += w2 * L * yy;
    f.LapY_H2 += w2 * K * K * yy;
    f.gradYt_H2 += w2 * K * vv;
    f.gradd1Y_H2 += w2 * K * L * yy;
    f.gradd1Yt_H1 += w1 * K * L * vv;
    f.gradd11Y_H1 += w1 * K * L * L * yy;
    f.LapYt_H2 += w2 * K * K * vv;
    f.Lapd1Yt_H1 += w1 * K * K * L * vv;
    f.Lapd1Y_H1 += w1 * K * K * L * yy;
    f.gradd1Y_H1 += w1 * K * L * yy;
    f.Yt_LapY_H2 += -w2 * K * yv;
    f.Lapd1Y_d1Yt_H1 += -w1 * K * L * yv;
    f.d1Yt_H1 += w1 * L * vv;
    f.Yt_H3 += w3 * vv;
    f.d1Y_H3 += w3 * L * yy;
  }
  const double V = g.volume();
  for (double* p : {&f.Yt_H2, &f.d1Y_H2, &f.LapY_H2, &f.gradYt_H2, &f.gradd1Y_H2, &f.gradd1Yt_H1, &f.gradd11Y_H1,
                    &f.LapYt_H2, &f.Lapd1Yt_H1, &f.Lapd1Y_H1, &f.gradd1Y_H1, &f.Yt_LapY_H2, &f.Lapd1Y_d1Yt_H1,
                    &f.d1Yt_H1, &f.Yt_H3, &f.d1Y_H3})
    *p *= V;
  return f;
}

struct EnergyReport {
  double t = 0;
  std::array<double, 7> E{};
  std::array<double, 5> D{};
  double E_total = 0;
  double D_total = 0;
  double script_E = 0;  // running sup E + int D, filled by the runner
};

inline const std::array<const char*, 7>& energy_component_names() {
  static const std::array<const char*, 7> n = {"E_Yt_H2",      "E_d1Y_H2",      "E_LapY_H2",    "E_gradYt_H2",
                                               "E_gradd1Y_H2", "E_gradd1Yt_H1", "E_gradd11Y_H1"};
  return n;
}

inline const std::array<const char*, 5>& dissipation_component_names() {
  static const std::array<const char*, 5> n = {"D_gradYt_H2", "D_gradd1Y_H2", "D_gradd11Y_H1", "D_LapYt_H2",
                                               "D_Lapd1Yt_H1"};
  return n;
}

inline EnergyReport energy_from_forms(const QuadraticForms& f, double t) {
  const double w = t + 1, w2 = w * w;
  EnergyReport r;
  r.t = t;
  r.E = {f.Yt_H2, f.d1Y_H2, f.LapY_H2, w * f.gradYt_H2, w * f.gradd1Y_H2, w2 * f.gradd1Yt_H1, w2 * f.gradd11Y_H1};
  r.D = {f.gradYt_H2, f.gradd1Y_H2, w * f.gradd11Y_H1, w * f.LapYt_H2, w2 * f.Lapd1Yt_H1};
  for (double x : r.E) r.E_total += x;
  for (double x : r.D) r.D_total += x;
  return r;
}

inline EnergyReport energy_E(const FlowState& s) {
  return energy_from_forms(quadratic_forms(forward(s.Y), forward(s.Yt)), s.t);
}

inline std::array<double, 5> dissipation_D(const FlowState& s) { return energy_E(s).D; }

struct TildeEnergy {
  double t = 0;
  std::array<double, 11> terms{};
  std::array<double, 8> lower_terms{};
  double total() const {
    double s = 0;
    for (double x : terms) s += x;
    return s;
  }
  double lower_bound() const {
    double s = 0;
    for (double x : lower_terms) s += x;
    return s;
  }
};

inline TildeEnergy tilde_from_forms(const QuadraticForms& f, double t) {
  const double w = t + 1, w2 = w * w;
  TildeEnergy te;
  te.t = t;
  te.terms = {f.Yt_H2 / 2,
              f.d1Y_H2 / 2,
              f.LapY_H2 / 8,
              -f.Yt_LapY_H2 / 4,
              w * f.gradYt_H2 / 8,
              w * f.gradd1Y_H2 / 8,
              w * f.Lapd1Y_H1 / 32,
              -w * f.Lapd1Y_d1Yt_H1 / 16,
              -f.gradd1Y_H1 / 32,
              w2 * f.gradd1Yt_H1 / 64,
              w2 * f.gradd11Y_H1 / 64};
  te.lower_terms = {f.Yt_H2 / 4,          f.d1Y_H2 / 2,          f.LapY_H2 / 32,           w * f.gradYt_H2 / 16,
                    w * f.gradd1Y_H2 / 16, w * f.Lapd1Y_H1 / 64, w2 * f.gradd1Yt_H1 / 64, w2 * f.gradd11Y_H1 / 64};
  return te;
}

inline TildeEnergy tilde_energy(const FlowState& s) {
  return tilde_from_forms(quadratic_forms(forward(s.Y), forward(s.Yt)), s.t);
}

struct LowerBoundCheck {
  double value = 0;
  double bound = 0;
  double margin = 0;
  bool pass = true;
};

inline LowerBoundCheck check_lower_bound(const TildeEnergy& te) {
  LowerBoundCheck c;
  c.value = te.total();
  c.bound = te.lower_bound();
  c.margin = c.value - c.bound;
  c.pass = c.margin >= -1e-13 * std::max(std::abs(c.value), std::abs(c.bound));
  return c;
}

// Dissipative terms of the differential inequality: 5/8, 3/32, 1/16, 1/32, 1/32.
inline double ledger_dissipation(const QuadraticForms& f, double t) {
  const double w = t + 1;
  return 5.0 / 8 * f.gradYt_H2 + 3.0 / 32 * f.gradd1Y_H2 + w / 16 * f.LapYt_H2 + w / 32 * f.gradd11Y_H1 +
         w * w / 32 * f.Lapd1Yt_H1;
}

// |(f | Yt - Lap Y/4 - (t+1) Lap Yt/4)_{H2}| + |(f | (t+1)/16 Lap d1^2 Y + (t+1)^2/32 Lap d1^2 Yt)_{H1}|
inline double ledger_rhs(const VectorSpectrum& f, const VectorSpectrum& Y, const VectorSpectrum& Yt, double t) {
  const Grid& g = Y.grid;
  const auto& tb = g.tables();
  const double w = t + 1;
  double a = 0, b = 0;
  for (std::size_t q = 0; q < g.num_modes(); ++q) {
    const Vec3 k{tb.kappa[0][q], tb.kappa[1][q], tb.kappa[2][q]};
    const double K = tb.ksq[q], L = k[0] * k[0];
    double sa = 0, sb = 0;
    for (int i = 0; i < g.dim(); ++i) {
      const Complex ga = Yt.c[i][q] + 0.25 * K * Y.c[i][q] + 0.25 * w * K * Yt.c[i][q];
      const Complex gb = K * L * (w / 16 * Y.c[i][q] + w * w / 32 * Yt.c[i][q]);
      const Complex fi = f.c[i][q];
      sa += fi.real() * ga.real() + fi.imag() * ga.imag();
      sb += fi.real() * gb.real() + fi.imag() * gb.imag();
    }
    if (sa == 0 && sb == 0) continue;
    a += tb.weight[q] * hs_weight(k, g.dim(), 2) * sa;
    b += tb.weight[q] * hs_weight(k, g.dim(), 1) * sb;
  }
  return g.volume() * (std::abs(a) + std::abs(b));
}

// |Y1|_{H3}^2 + |d1 Y0|_{H3}^2 + |Lap Y0|_{H2}^2
inline double initial_smallness(const QuadraticForms& f) { return f.Yt_H3 + f.d1Y_H3 + f.LapY_H2; }

inline double initial_smallness(const FlowState& s) {
  return initial_smallness(quadratic_forms(forward(s.Y), forward(s.Yt)));
}

struct LedgerSample {
  double t = 0;
  double tilde_E = 0;
  double dissipation = 0;  // weighted dissipative terms
  double rhs = 0;
};

struct LedgerRecord {
  double t = 0;
  double dEdt = 0;
  double lhs = 0;
  double rhs = 0;
  double band = 0;
  double slack = 0;  // rhs + band - lhs
  bool pass = true;
  double integrated_rhs = 0;
};

inline std::vector<LedgerRecord> ledger_check(const std::vector<LedgerSample>& s) {
  if (s.size() < 3) throw InvalidArgument("ledger check needs at least 3 samples");
  const std::size_t n = s.size();
  const double h = s[1].t - s[0].t;
  if (!(h > 0)) throw InvalidArgument("ledger samples must be increasing in time");
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs((s[i].t - s[i - 1].t) - h) > 1e-9 * std::max(1.0, std::abs(s[i].t)))
      throw InvalidArgument("ledger samples must have a uniform cadence");
  std::vector<LedgerRecord> out(n);
  double integ = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double der;
    if (i == 0)
      der = (-3 * s[0].tilde_E + 4 * s[1].tilde_E - s[2].tilde_E) / (2 * h);
    else if (i == n - 1)
      der = (3 * s[n - 1].tilde_E - 4 * s[n - 2].tilde_E + s[n - 3].tilde_E) / (2 * h);
    else
      der = (s[i + 1].tilde_E - s[i - 1].tilde_E) / (2 * h);
    if (i > 0) integ += 0.5 * h * (s[i].rhs + s[i - 1].rhs);
    LedgerRecord& r = out[i];
    r.t = s[i].t;
    r.dEdt = der;
    r.lhs = der + s[i].dissipation;
    r.rhs = s[i].rhs;
    r.band = 10 * h * h * std::abs(s[i].tilde_E);
    r.slack = r.rhs + r.band - r.lhs;
    r.pass = r.slack >= 0;
    r.integrated_rhs = integ;
  }
  return out;
}

inline double ledger_pass_rate(const std::vector<LedgerRecord>& r) {
  if (r.empty()) return 1.0;
  std::size_t ok = 0;
  for (const auto& x : r) ok += x.pass;
  return double(ok) / double(r.size());
}

// Running trapezoid of sampled values.
inline std::vector<double> running_trapezoid(const std::vector<double>& t, const std::vector<double>& v) {
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i) out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (v[i] + v[i - 1]);
  return out;
}

struct GradUSample {
  double t = 0;
  double linf = 0;  // max |grad_y Yt A^T|
};

inline std::vector<double> grad_u_linf_time_integral(const std::vector<GradUSample>& traj) {
  std::vector<double> t, v;
  for (const auto& s : traj) {
    t.push_back(s.t);
    v.push_back(s.linf);
  }
  return running_trapezoid(t, v);
}

// Pointwise max of |grad Yt A^T| for a state.
inline double grad_u_linf(const FlowState& s) {
  const VectorSpectrum Yh = forward(s.Y), Vh = forward(s.Yt);
  const auto pw = geom::pointwise(Yh, false);
  const auto V = geom::gradient_matrix(Vh);
  const int d = s.grid().dim();
  double m = 0;
  for (std::size_t p = 0; p < s.grid().num_points(); ++p) {
    double acc = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double e = 0;
        for (int k = 0; k < d; ++k) e += V[i * d + k][p] * pw.A[j * d + k][p];
        acc += e * e;
      }
    m = std::max(m, std::sqrt(acc));
  }
  return m;
}

}  // namespace mhdl
