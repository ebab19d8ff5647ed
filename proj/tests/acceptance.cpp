// Acceptance driver: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>

#include "mhdl/mhdl.hpp"

using namespace mhdl;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char b[128];
  std::snprintf(b, sizeof b, f, a);
  return b;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool in(double x, double lo, double hi) { return x >= lo && x <= hi; }

// ---------------------------------------------------------------- C1

// y'' + K y' + k1^2 y = 0 from (y0, v0); returns (y, y') at t
std::pair<double, double> mode_solution(double k1sq, double K, double y0, double v0, double t) {
  using C = std::complex<double>;
  const double disc = K * K - 4 * k1sq;
  if (disc == 0.0) {
    const double l = -K / 2;
    const double c1 = v0 - l * y0;
    const double e = std::exp(l * t);
    return {(y0 + c1 * t) * e, (c1 + l * (y0 + c1 * t)) * e};
  }
  const C s = std::sqrt(C(disc));
  const C lp = (-K + s) / 2.0, lm = (-K - s) / 2.0;
  const C cp = (v0 - lm * y0) / (lp - lm), cm = (lp * y0 - v0) / (lp - lm);
  const C ep = std::exp(lp * t), em = std::exp(lm * t);
  return {(cp * ep + cm * em).real(), (cp * lp * ep + cm * lm * em).real()};
}

Outcome c1_linear_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  const Grid g = Grid::cube(3, 16, 2 * pi);
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pick(-5, 5);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  StepperOptions so;
  so.nonlinear = false;
  const double dt = 0.1;
  const LagrangianStepper st(g, dt, so);
  double worst = 0;
  int degenerate = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::array<int, 3> k{};
    if (trial == 0)
      k = {2, 0, 0};
    else if (trial == 1)
      k = {1, 1, 0};
    else
      do k = {pick(rng), pick(rng), pick(rng)};
      while (k == std::array<int, 3>{0, 0, 0});
    const double k1sq = double(k[0] * k[0]), K = double(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    if (K * K == 4 * k1sq) ++degenerate;
    Vec3 e{unif(rng), unif(rng), unif(rng)};
    const double a = unif(rng), b = unif(rng), phase = pi * unif(rng);
    auto theta = [&](const Vec3& x) { return k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + phase; };
    FlowState s = FlowState::zero(g);
    for (int i = 0; i < 3; ++i) {
      s.Y.c[i] = make_scalar(g, [&](const Vec3& x) { return e[i] * a * std::sin(theta(x)); }).v;
      s.Yt.c[i] = make_scalar(g, [&](const Vec3& x) { return e[i] * b * std::cos(theta(x)); }).v;
    }
    VectorSpectrum Y = forward(s.Y), V = forward(s.Yt);
    for (int n = 1; n <= 100; ++n) {
      st.step_spectral(Y, V);
      if (n % 10) continue;
      const double t = n * dt;
      const auto [ya, va] = mode_solution(k1sq, K, a, 0.0, t);
      const auto [yb, vb] = mode_solution(k1sq, K, 0.0, b, t);
      const VectorField Yp = inverse(Y), Vp = inverse(V);
      for (std::size_t p = 0; p < g.num_points(); ++p) {
        const double th = theta(g.point(p));
        const double ye = ya * std::sin(th) + yb * std::cos(th), ve = va * std::sin(th) + vb * std::cos(th);
        for (int i = 0; i < 3; ++i) {
          worst = std::max(worst, std::abs(Yp.c[i][p] - e[i] * ye));
          worst = std::max(worst, std::abs(Vp.c[i][p] - e[i] * ve));
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-10 && degenerate >= 1 && secs < 10,
          fmt("max error %.3e", worst) + " (<= 1e-10), degenerate modes " + std::to_string(degenerate) +
              fmt(", runtime %.2f s (< 10 s)", secs)};
}

// ---------------------------------------------------------------- C2

Outcome c2_decay_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> ts;
  for (int i = 0; i <= 8; ++i) ts.push_back(std::pow(10.0, 2.0 + 0.25 * i));
  const DecayProfile prof = singular_velocity_profile(1.45);
  DecayOracleOptions o;
  o.dimension = 3;
  const auto a = linear_decay_oracle(grad_Yt_H2(), ts, prof, o);
  const auto b = linear_decay_oracle(grad_d1_Yt_H1(), ts, prof, o);
  const double sa = fit_power_law(ts, a).slope, sb = fit_power_law(ts, b).slope;
  const double secs = seconds_since(t0);
  return {in(sa, -0.55, -0.45) && in(sb, -1.05, -0.95) && secs < 60,
          fmt("slope |grad Yt|_H2 %.4f", sa) + " (-0.5 +- 0.05), " + fmt("slope |grad d1 Yt|_H1 %.4f", sb) +
              " (-1 +- 0.05)" + fmt(", runtime %.1f s (< 60 s)", secs)};
}

// ---------------------------------------------------------------- C3, C4, C10

std::string small_data_config() {
  std::string modes;
  for (int m = 1; m <= 16; ++m) modes += std::to_string(m) + " 0 vel " + fmt("%.17g", 1.0 / std::sqrt(double(m))) + "; ";
  modes += "0 1 vel 40";
  return "dimension = 2\nsizes = 256 256\nlengths = 32pi 2pi\ndt = 0.05\nt_end = 50\ncadence = 0.25\n"
         "init = modes\ninit_modes = " +
         modes + "\nepsilon0 = 1e-4\n";
}

struct SmallDataRun {
  bool ok = false;
  std::string error;
  RunReport rep;
  double secs = 0;
};

SmallDataRun& small_data_run(const std::string& out) {
  static SmallDataRun r;
  static bool done = false;
  if (done) return r;
  done = true;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    RunConfig c = parse_config(small_data_config());
    c.output_dir = out + "/small_data";
    RunOptions o;
    o.fit_window = {5.0, 50.0};
    r.rep = run_simulation(c, o);
    r.ok = r.rep.completed;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.secs = seconds_since(t0);
  return r;
}

Outcome c3_small_data(const std::string& out) {
  const SmallDataRun& r = small_data_run(out);
  if (!r.ok) return {false, "run aborted: " + r.error};
  const double slope = r.rep.fit_grad_Yt_H2 ? r.rep.fit_grad_Yt_H2->slope : std::nan("");
  const bool pass = r.rep.energy_ratio <= 3.0 && in(slope, -0.75, -0.30) && r.secs < 600;
  return {pass, fmt("script_E(50)/script_E(0) %.4f", r.rep.energy_ratio) + " (<= 3), " +
                    fmt("decay fit over [5, 50] %.4f", slope) + " (in [-0.75, -0.30])" +
                    fmt(", runtime %.0f s (< 600 s)", r.secs)};
}

FlowState random_state(const Grid& g, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(-4, 4);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const double scale = std::pow(10.0, 3 * unif(rng));
  FlowState s = FlowState::zero(g);
  s.t = 50 * (1 + unif(rng));
  for (auto* f : {&s.Y, &s.Yt})
    for (int i = 0; i < 3; ++i)
      for (int term = 0; term < 4; ++term) {
        const std::array<int, 3> m{pick(rng), pick(rng), pick(rng)};
        const double a = scale * unif(rng), ph = pi * unif(rng);
        const ScalarField w =
            make_scalar(g, [&](const Vec3& x) { return a * std::cos(m[0] * x[0] + m[1] * x[1] + m[2] * x[2] + ph); });
        for (std::size_t p = 0; p < g.num_points(); ++p) f->c[i][p] += w.v[p];
      }
  return s;
}

Outcome c4_ledger(const std::string& out) {
  const Grid g = Grid::cube(3, 16, 2 * pi);
  std::mt19937_64 rng(77);
  double worst = std::numeric_limits<double>::infinity();
  int failures = 0;
  for (int n = 0; n < 100; ++n) {
    const LowerBoundCheck c = check_lower_bound(tilde_energy(random_state(g, rng)));
    const double rel = c.margin / std::max(std::abs(c.value), 1e-300);
    worst = std::min(worst, rel);
    if (c.margin < 0) ++failures;
  }
  const SmallDataRun& r = small_data_run(out);
  if (!r.ok) return {false, "lower bound failures " + std::to_string(failures) + "; small-data run aborted: " + r.error};
  const double rate = r.rep.ledger_pass_rate;
  return {failures == 0 && rate >= 0.99,
          "lower bound failures " + std::to_string(failures) + "/100" + fmt(" (min relative margin %.3e)", worst) +
              fmt(", differential inequality pass rate %.4f", rate) + " (>= 0.99) over " +
              std::to_string(r.rep.ledger.size()) + " samples"};
}

Outcome c10_grad_u(const std::string& out) {
  const SmallDataRun& r = small_data_run(out);
  if (!r.ok) return {false, "run aborted: " + r.error};
  const auto& rows = r.rep.rows;
  const double total = rows.back().grad_u_l1t;
  const double t_cut = 0.8 * rows.back().t;
  double at_cut = 0;
  for (const auto& row : rows)
    if (row.t <= t_cut + 1e-12) at_cut = row.grad_u_l1t;
  const double frac = total > 0 ? (total - at_cut) / total : std::nan("");
  return {frac <= 0.05, fmt("integral %.4e", total) + fmt(", last-20%% increment fraction %.4f", frac) + " (<= 0.05)"};
}

// ---------------------------------------------------------------- C5

Outcome c5_scaling(const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig c = parse_config("dimension = 2\nsizes = 128 128\ndt = 0.05\nt_end = 10\ninit = random\nseed = 0\n");
  c.output_dir = out + "/scaling";
  RunOptions o;
  o.write_files = false;
  const ScalingReport s = nonlinear_scaling_study(c, {1e-2, 5e-3, 2.5e-3}, o);
  const double secs = seconds_since(t0);
  return {in(s.fit.slope, 1.35, 2.1) && secs < 900,
          fmt("exponent %.4f", s.fit.slope) + " (in [1.35, 2.1])" + fmt(", r^2 %.5f", s.fit.r_squared) +
              fmt(", runtime %.0f s (< 900 s)", secs)};
}

// ---------------------------------------------------------------- C6, C7

std::string factors_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt("%.3e", v[i]);
  return s;
}

Outcome c6_constraint() {
  std::vector<double> drift;
  for (double dt : {0.1, 0.05, 0.025}) {
    RunConfig c = parse_config("dimension = 2\nsizes = 64 64\ndt = " + fmt("%.17g", dt) +
                               "\nt_end = 1\ninit = random\ninit_scale = 0.02\n");
    RunOptions o;
    o.write_files = false;
    const RunReport r = run_simulation(c, o);
    drift.push_back(det_drift(r.final_lagrangian->Y));
  }
  const double f1 = drift[0] / drift[1], f2 = drift[1] / drift[2];
  return {in(f1, 3, 5) && in(f2, 3, 5), "max|det - 1| at T=1: " + factors_text(drift) + fmt("; factors %.3f", f1) +
                                             fmt(", %.3f", f2) + " (in [3, 5])"};
}

Outcome c7_formulations() {
  std::vector<double> disc;
  for (double dt : {0.1, 0.05, 0.025}) {
    RunConfig c = parse_config("dimension = 3\nsizes = 16 16 16\ndt = " + fmt("%.17g", dt) +
                               "\nt_end = 1\nsolver = both\ninit = random\nepsilon0 = 1e-4\n");
    RunOptions o;
    o.write_files = false;
    const CompareReport r = compare_formulations(c, o);
    disc.push_back(std::max(r.final_b, r.final_u));
  }
  const double f1 = disc[0] / disc[1], f2 = disc[1] / disc[2];
  return {in(f1, 3, 5) && in(f2, 3, 5) && disc[2] <= 1e-5,
          "discrepancy at T=1: " + factors_text(disc) + fmt("; factors %.3f", f1) + fmt(", %.3f", f2) +
              " (in [3, 5]), finest <= 1e-5"};
}

// ---------------------------------------------------------------- C8

Outcome c8_pressure() {
  const Grid g = Grid::cube(3, 16, 2 * pi);
  InitialDataSpec spec;
  spec.seed = 0;
  spec.modes = random_modes(3, 2, 8, spec.seed);
  const InitialData d = generate_for_smallness(g, spec, 1e-4, false);
  ForceOptions fo;
  fo.pressure_max_iter = 50;
  const NonlinearForce F = compute_force(d.lagrangian, fo);
  const InitialData h = generate_initial_data(g, spec, d.scale / 2, false);
  const NonlinearForce Fh = compute_force(h.lagrangian, fo);
  const double ratio = Fh.contraction_estimate / F.contraction_estimate;
  const VectorField gp = inverse(F.grad_p_hat);
  const double leray = max_abs(leray_project(gp));
  return {F.pressure_iterations <= 10 && in(ratio, 0.375, 0.625) && leray <= 1e-10,
          "iterations " + std::to_string(F.pressure_iterations) + " (<= 10), " +
              fmt("contraction %.4e", F.contraction_estimate) + fmt(" -> %.4e", Fh.contraction_estimate) +
              fmt(" ratio %.4f", ratio) + " (0.5 +- 25%), " + fmt("Leray of grad p %.3e", leray) + " (<= 1e-10)"};
}

// ---------------------------------------------------------------- C9

Outcome c9_admissibility() {
  const Grid g(3, {64, 8, 8}, {8.0, 2 * pi, 2 * pi});
  const double K = 3.0, sigma = K / 5.5;
  auto x1c = [&](const Vec3& x) { return centred_coordinate(x[0], g.length(0)); };
  auto field = [&](std::function<double(double)> chi) {
    // e1 + curl(chi(x1) phi(x2, x3) e1), phi = 0.4 sin x2 cos x3
    return make_vector(g, [&](const Vec3& x) {
      const double c = 0.4 * chi(x1c(x));
      return Vec3{1.0, -c * std::sin(x[1]) * std::sin(x[2]), -c * std::cos(x[1]) * std::cos(x[2])};
    });
  };
  VectorField e1(g);
  e1.c[0].assign(g.num_points(), 1.0);
  const auto seeds = plane_seeds(g, 6, 6);
  const auto zero = check_admissible(e1, K, 1e-6, seeds);
  const auto zm = check_admissible(field([&](double x) { return x / sigma * std::exp(-x * x / (sigma * sigma)); }), K,
                                   1e-6, seeds);
  const auto nz = check_admissible(field([&](double x) { return std::exp(-x * x / (sigma * sigma)); }), K, 1e-6, seeds);
  const InitialMap m = construct_initial_map(e1, 1e-10);
  double dx = 0, da = 0;
  const std::size_t plane = g.num_points() / g.size(0);
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    Vec3 y = g.point(p);
    y[0] = imap::centered_y1(g, int(p / plane));
    for (int i = 0; i < 3; ++i) {
      dx = std::max(dx, std::abs(m.X0.c[i][p] - y[i]));
      for (int j = 0; j < 3; ++j) da = std::max(da, std::abs(m.A0.at(i, j)[p] - (i == j)));
    }
  }
  const bool ok = zero.admissible && zm.admissible && !nz.admissible && m.residual_e1 == 0.0 &&
                  m.residual_det == 0.0 && dx == 0.0 && da == 0.0;
  return {ok, std::string("zero field ") + (zero.admissible ? "admissible" : "NOT admissible") +
                  fmt(" (max %.2e)", zero.max_abs_integral) + ", zero-mean profile " +
                  (zm.admissible ? "admissible" : "NOT admissible") + fmt(" (max %.2e", zm.max_abs_integral) +
                  fmt(" vs tol %.2e)", zm.tolerance) + ", nonzero-mean profile " +
                  (nz.admissible ? "admissible" : "not admissible") + fmt(" (max %.2e)", nz.max_abs_integral) +
                  fmt("; identity map residuals %.1e", m.residual_e1) + fmt(" / %.1e", m.residual_det) +
                  fmt(", |X0 - y| %.1e", dx) + fmt(", |A0 - I| %.1e", da)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out = argc > 1 ? argv[1] : "acceptance_out";
  std::filesystem::create_directories(out);
  struct Item {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Item> items = {
      {1, "linear exactness", c1_linear_exactness},
      {2, "whole-space decay oracle", c2_decay_oracle},
      {3, "nonlinear small-data run", [&] { return c3_small_data(out); }},
      {4, "energy ledger", [&] { return c4_ledger(out); }},
      {5, "nonlinear scaling", [&] { return c5_scaling(out); }},
      {6, "constraint convergence", c6_constraint},
      {7, "formulation equivalence", c7_formulations},
      {8, "pressure fixed point", c8_pressure},
      {9, "admissibility", c9_admissibility},
      {10, "grad u time integral", [&] { return c10_grad_u(out); }},
  };
  int failed = 0;
  for (const auto& it : items) {
    Outcome o;
    try {
      o = it.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2d %-26s %s  %s\n", it.id, it.name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", int(items.size()) - failed, items.size());
  return failed == 0 ? 0 : 1;
}
