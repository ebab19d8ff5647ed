#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "mhdl/mhdl.hpp"

using namespace mhdl;

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kAbort = 3, kFailure = 4 };

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open config '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(f)), {});
  try {
    return parse_config(text);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + std::string(e.what()).substr(std::string(e.what()).find(": ") + 2));
  }
}

std::string num(double x) { return diag::num(x); }

int cmd_run(const std::string& config, const std::string& output, const std::string& resume,
            std::optional<std::uint64_t> seed) {
  const RunConfig c = load_config(config);
  RunOptions o;
  o.resume = resume;
  if (!output.empty()) o.output_dir = output;
  o.seed = seed;
  o.on_sample = [](const DiagnosticsRow& r) {
    std::fprintf(stderr, "t = %-10.4g E_total = %-12.5e script_E = %-12.5e pressure_iters = %d\n", r.t,
                 r.energy.E_total, r.energy.script_E, r.pressure_iters);
  };
  const RunReport r = run_simulation(c, o);
  RunConfig eff = c;
  if (o.output_dir) eff.output_dir = *o.output_dir;
  std::cout << run::report_json(r, eff) << '\n';
  return kOk;
}

int cmd_compare(const std::string& config, const std::string& output, std::optional<std::uint64_t> seed) {
  RunConfig c = load_config(config);
  c.solver = SolverKind::Both;
  RunOptions o;
  if (!output.empty()) o.output_dir = output;
  o.seed = seed;
  const CompareReport r = compare_formulations(c, o);
  std::cout << "t,b_discrepancy,u_discrepancy,det_drift\n";
  for (std::size_t i = 0; i < r.t.size(); ++i)
    std::cout << num(r.t[i]) << ',' << num(r.b_discrepancy[i]) << ',' << num(r.u_discrepancy[i]) << ','
              << num(r.det_drift[i]) << '\n';
  std::cout << "# max_b " << num(r.max_b) << " max_u " << num(r.max_u) << " final_b " << num(r.final_b)
            << " final_u " << num(r.final_u) << " correlation_with_det_drift " << num(r.correlation) << '\n';
  return kOk;
}

int cmd_oracle(const std::string& norm, double beta, double kmax, int dim, double t0, double t1, int points) {
  NormSpec spec;
  if (norm == "grad_Yt_H2")
    spec = grad_Yt_H2();
  else if (norm == "grad_d1_Yt_H1")
    spec = grad_d1_Yt_H1();
  else
    throw InvalidArgument("unknown norm '" + norm + "' (grad_Yt_H2 or grad_d1_Yt_H1)");
  if (!(t0 > 0) || !(t1 > t0) || points < 2) throw InvalidArgument("need 0 < t0 < t1 and at least 2 points");
  std::vector<double> ts;
  for (int i = 0; i < points; ++i) ts.push_back(t0 * std::pow(t1 / t0, double(i) / (points - 1)));
  DecayOracleOptions o;
  o.dimension = dim;
  const auto v = linear_decay_oracle(spec, ts, singular_velocity_profile(beta, kmax), o);
  std::cout << "t," << spec.name << '\n';
  for (std::size_t i = 0; i < ts.size(); ++i) std::cout << num(ts[i]) << ',' << num(v[i]) << '\n';
  const DecayFit f = fit_power_law(ts, v, spec.name);
  std::cout << "# slope " << num(f.slope) << " r_squared " << num(f.r_squared) << '\n';
  return kOk;
}

VectorField admissibility_case(const std::string& name, const Grid& g, double K) {
  const double sigma = K / 5.5;
  std::function<double(double)> chi;
  if (name == "zero")
    chi = [](double) { return 0.0; };
  else if (name == "zero-mean")
    chi = [sigma](double x) { return x / sigma * std::exp(-x * x / (sigma * sigma)); };
  else if (name == "nonzero-mean")
    chi = [sigma](double x) { return std::exp(-x * x / (sigma * sigma)); };
  else
    throw InvalidArgument("unknown case '" + name + "' (zero, zero-mean, nonzero-mean)");
  // e1 + curl(chi(x1) phi e1), phi = 0.4 sin x2 cos x3
  return make_vector(g, [&](const Vec3& x) {
    const double c = 0.4 * chi(centred_coordinate(x[0], g.length(0)));
    return Vec3{1.0, -c * std::sin(x[1]) * std::sin(x[2]), -c * std::cos(x[1]) * std::cos(x[2])};
  });
}

int cmd_admissible(const std::string& checkpoint, const std::string& cas, double K, double tol, int seeds,
                   const std::string& output) {
  VectorField b0 = [&] {
    if (!checkpoint.empty()) {
      const Checkpoint cp = read_checkpoint(checkpoint);
      if (!cp.eulerian) throw InvalidArgument("admissibility needs an Eulerian checkpoint (field b)");
      return cp.eulerian->b;
    }
    return admissibility_case(cas, Grid(3, {64, 8, 8}, {8.0, 2 * pi, 2 * pi}), K);
  }();
  const auto rep = check_admissible(b0, K, tol, plane_seeds(b0.grid, seeds, seeds));
  if (!output.empty()) {
    std::ofstream f(output, std::ios::trunc);
    if (!f) throw Error("cannot write '" + output + "'");
    f << rep.csv();
  } else {
    std::cout << rep.csv();
  }
  std::cout << "# admissible " << (rep.admissible ? "yes" : "no") << " b0_condition "
            << (rep.b0_admissible ? "yes" : "no") << " max_abs_integral " << num(rep.max_abs_integral)
            << " tolerance " << num(rep.tolerance) << '\n'
            << "# " << rep.note << '\n';
  return kOk;
}

int cmd_fit(const std::string& csv, const std::string& column, double t0, double t1, int weight) {
  auto series = read_diagnostics_column(csv, column);
  for (auto& [t, v] : series) v = std::sqrt(std::max(v, 0.0)) / std::pow(t + 1, 0.5 * weight);
  const DecayFit f = fit_decay_rate(series, t0, t1, column);
  std::cout << "quantity," << "t0,t1,slope,intercept,r_squared,points\n"
            << f.quantity << ',' << num(f.t0) << ',' << num(f.t1) << ',' << num(f.slope) << ',' << num(f.intercept)
            << ',' << num(f.r_squared) << ',' << f.points << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lagrangian solver for viscous non-resistive MHD near a uniform magnetic field"};
  app.require_subcommand(1);

  std::string config, output, resume;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "step the configured formulation(s) to t_end");
  run->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
  run->add_option("--output", output, "output directory (overrides the config)");
  run->add_option("--resume", resume, "checkpoint to resume from")->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "seed for random initial data (overrides the config)");

  auto* cmp = app.add_subcommand("compare", "run both formulations and report their discrepancy");
  cmp->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
  cmp->add_option("--output", output, "output directory (overrides the config)");
  cmp->add_option("--seed", seed, "seed for random initial data (overrides the config)");

  std::string norm = "grad_Yt_H2";
  double beta = 1.45, kmax = 4.0, t0 = 1e2, t1 = 1e4;
  int dim = 3, points = 9;
  auto* orc = app.add_subcommand("oracle", "whole-space linear decay by quadrature");
  orc->add_option("--norm", norm, "grad_Yt_H2 or grad_d1_Yt_H1")->capture_default_str();
  orc->add_option("--beta", beta, "low-frequency singularity |k|^-beta of the velocity profile")->capture_default_str();
  orc->add_option("--kmax", kmax, "profile cutoff")->capture_default_str();
  orc->add_option("--dimension", dim, "2 or 3")->capture_default_str();
  orc->add_option("--t0", t0, "first time")->capture_default_str();
  orc->add_option("--t1", t1, "last time")->capture_default_str();
  orc->add_option("--points", points, "log-spaced sample times")->capture_default_str();

  std::string checkpoint, cas = "zero-mean";
  double K = 3.0, tol = 1e-6;
  int seeds = 8;
  auto* adm = app.add_subcommand("admissible", "integrate b0 - e1 along trajectories of b0");
  adm->add_option("--checkpoint", checkpoint, "Eulerian checkpoint supplying b0")->check(CLI::ExistingFile);
  adm->add_option("--case", cas, "built-in b0: zero, zero-mean or nonzero-mean")->capture_default_str();
  adm->add_option("--K", K, "support half-width along x1")->capture_default_str();
  adm->add_option("--tol", tol, "relative tolerance")->capture_default_str();
  adm->add_option("--seeds", seeds, "seeds per transverse axis")->capture_default_str();
  adm->add_option("--output", output, "CSV path (stdout if omitted)");

  std::string csv, column = "E4";
  double f0 = 5, f1 = 50;
  int weight = 1;
  auto* fit = app.add_subcommand("fit", "log-log decay fit of a diagnostics column");
  fit->add_option("--csv", csv, "diagnostics CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--column", column, "column holding a weighted squared norm")->capture_default_str();
  fit->add_option("--t0", f0, "window start")->capture_default_str();
  fit->add_option("--t1", f1, "window end")->capture_default_str();
  fit->add_option("--weight", weight, "power of (t+1) divided out of the squared norm")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, output, resume, seed);
    if (*cmp) return cmd_compare(config, output, seed);
    if (*orc) return cmd_oracle(norm, beta, kmax, dim, t0, t1, points);
    if (*adm) return cmd_admissible(checkpoint, cas, K, tol, seeds, output);
    if (*fit) return cmd_fit(csv, column, f0, f1, weight);
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const SolverAbort& e) {
    std::cerr << "solver abort: " << e.what() << '\n';
    return kAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
