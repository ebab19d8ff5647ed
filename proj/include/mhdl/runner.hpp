#pragma once

#include <filesystem>
#include <functional>
#include <json.hpp>

#include "mhdl/checkpoint.hpp"
#include "mhdl/config.hpp"
#include "mhdl/diagnostics.hpp"
#include "mhdl/fit.hpp"

namespace mhdl {

struct RunOptions {
  std::string resume;                     // checkpoint path, empty for a fresh start
  std::optional<std::string> output_dir;  // overrides the config
  std::optional<std::uint64_t> seed;      // overrides the config
  bool write_files = true;
  std::pair<double, double> fit_window{5.0, 50.0};
  std::size_t compare_stride = 1;  // grid-point stride for formulation discrepancies
  std::function<void(const DiagnosticsRow&)> on_sample;
};

struct EulerianRow {
  double t = 0;
  double u_L2 = 0, beta_L2 = 0, p_L2 = 0;
  double div_u_max = 0, div_b_max = 0;
  double b_discrepancy = std::numeric_limits<double>::quiet_NaN();
  double u_discrepancy = std::numeric_limits<double>::quiet_NaN();
  double det_drift = std::numeric_limits<double>::quiet_NaN();
};

struct RunReport {
  bool completed = false;
  double t_start = 0, t_final = 0;
  long steps = 0;
  std::vector<DiagnosticsRow> rows;
  std::vector<LedgerRecord> ledger;
  std::vector<EulerianRow> eulerian_rows;
  double initial_smallness = 0;
  double initial_det_residual = 0;
  double script_E_initial = 0, script_E_final = 0;
  double energy_ratio = 0;
  bool energy_bounded = true;
  double det_drift_max = 0;
  double ledger_pass_rate = 1.0;
  double nonlinear_integral = 0;  // time-integrated ledger rhs
  double grad_u_l1t = 0;
  int pressure_iters_max = 0;
  std::optional<DecayFit> fit_grad_Yt_H2, fit_grad_d1_Yt_H1;
  std::optional<FlowState> final_lagrangian;
  std::optional<EulerState> final_eulerian;
  std::string diagnostics_path, eulerian_diagnostics_path, checkpoint_path, report_path;
};

// Discrepancy |b(X) - (e1 + d1 Y)| and |u(X) - Yt| over (strided) grid points.
struct Discrepancy {
  double b = 0, u = 0;
};

inline Discrepancy formulation_discrepancy(const FlowState& lag, const EulerState& eul, std::size_t stride = 1) {
  require_same_grid(lag.grid(), eul.grid(), "formulation_discrepancy");
  if (stride == 0) throw InvalidArgument("stride must be positive");
  const Grid& g = lag.grid();
  const TrajectorySamples ts = pushforward_fields(lag);
  std::vector<Vec3> pts;
  std::vector<std::size_t> idx;
  for (std::size_t p = 0; p < g.num_points(); p += stride) {
    Vec3 x{0, 0, 0};
    for (int i = 0; i < g.dim(); ++i) x[i] = ts.X.c[i][p];
    pts.push_back(x);
    idx.push_back(p);
  }
  const auto ub = evaluate_at_flow(eul.u, pts);
  const auto bb = evaluate_at_flow(eul.b, pts);
  Discrepancy d;
  for (std::size_t j = 0; j < pts.size(); ++j)
    for (int i = 0; i < g.dim(); ++i) {
      d.u = std::max(d.u, std::abs(ub[j][i] - ts.u.c[i][idx[j]]));
      d.b = std::max(d.b, std::abs(bb[j][i] - ts.b.c[i][idx[j]]));
    }
  return d;
}

namespace run {

struct Accumulators {
  double sup_E = 0;
  double int_D = 0;
  double last_D = 0;
  double grad_u_l1t = 0;
  double last_grad_u = 0;
  double last_t = 0;
  double last_t_sample = 0;
  bool started = false;
};

inline nlohmann::json to_json(const Accumulators& a) {
  return {{"sup_E", a.sup_E},       {"int_D", a.int_D},           {"last_D", a.last_D},
          {"grad_u_l1t", a.grad_u_l1t}, {"last_grad_u", a.last_grad_u}, {"last_t", a.last_t},
          {"last_t_sample", a.last_t_sample}, {"started", a.started}};
}

inline Accumulators from_json(const nlohmann::json& j) {
  Accumulators a;
  a.sup_E = j.at("sup_E");
  a.int_D = j.at("int_D");
  a.last_D = j.at("last_D");
  a.grad_u_l1t = j.at("grad_u_l1t");
  a.last_grad_u = j.at("last_grad_u");
  a.last_t = j.at("last_t");
  a.last_t_sample = j.at("last_t_sample");
  a.started = j.at("started");
  return a;
}

inline void write_sidecar(const std::string& ckpt_path, const Accumulators& a, const RunConfig& c) {
  nlohmann::json j = to_json(a);
  j["config"] = dump_config(c);
  std::ofstream f(ckpt_path + ".json", std::ios::trunc);
  if (!f) throw Error("cannot write checkpoint sidecar '" + ckpt_path + ".json'");
  f << j.dump(2) << '\n';
}

inline std::optional<Accumulators> read_sidecar(const std::string& ckpt_path) {
  std::ifstream f(ckpt_path + ".json");
  if (!f) return std::nullopt;
  try {
    return from_json(nlohmann::json::parse(f));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad checkpoint sidecar: " + std::string(e.what()));
  }
}

inline std::vector<ModeSpec> modes_for(const RunConfig& c, std::uint64_t seed) {
  if (c.init == InitKind::Modes) return c.init_modes;
  return random_modes(c.dimension, c.init_max_mode, c.init_mode_count, seed);
}

inline EulerianRow eulerian_row(const EulerState& e) {
  const Grid& g = e.grid();
  EulerianRow r;
  r.t = e.t;
  const VectorSpectrum uh = forward(e.u), bh = forward(e.b);
  r.u_L2 = l2_norm(uh);
  VectorSpectrum beta = EulerianStepper::beta_of(e);
  r.beta_L2 = l2_norm(beta);
  const Spectrum ph = forward(g, e.p.v);
  r.p_L2 = std::sqrt(std::max(0.0, spectral_pairing(g, ph, ph, 0, [](const Vec3&) { return 1.0; })));
  for (const auto* s : {&uh, &bh}) {
    const RealArray dv = inverse(g, divergence(*s));
    double m = 0;
    for (double x : dv) m = std::max(m, std::abs(x));
    (s == &uh ? r.div_u_max : r.div_b_max) = m;
  }
  return r;
}

inline void write_eulerian_csv(const std::string& path, const std::vector<EulerianRow>& rows) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot open '" + path + "'");
  f << "t,u_L2,beta_L2,p_L2,div_u_max,div_b_max,b_discrepancy,u_discrepancy,det_drift\n";
  for (const auto& r : rows)
    f << diag::num(r.t) << ',' << diag::num(r.u_L2) << ',' << diag::num(r.beta_L2) << ',' << diag::num(r.p_L2) << ','
      << diag::num(r.div_u_max) << ',' << diag::num(r.div_b_max) << ',' << diag::num(r.b_discrepancy) << ','
      << diag::num(r.u_discrepancy) << ',' << diag::num(r.det_drift) << '\n';
}

inline std::string report_json(const RunReport& r, const RunConfig& c, const std::string& failure = "") {
  nlohmann::json j;
  j["completed"] = r.completed;
  j["t_start"] = r.t_start;
  j["t_final"] = r.t_final;
  j["steps"] = r.steps;
  j["initial_smallness"] = r.initial_smallness;
  j["initial_det_residual"] = r.initial_det_residual;
  j["script_E_initial"] = r.script_E_initial;
  j["script_E_final"] = r.script_E_final;
  j["energy_ratio"] = r.energy_ratio;
  j["energy_cap"] = c.energy_cap;
  j["energy_bounded"] = r.energy_bounded;
  j["det_drift_max"] = r.det_drift_max;
  j["ledger_pass_rate"] = r.ledger_pass_rate;
  j["nonlinear_integral"] = r.nonlinear_integral;
  j["grad_u_l1t"] = r.grad_u_l1t;
  j["pressure_iters_max"] = r.pressure_iters_max;
  auto fitj = [](const std::optional<DecayFit>& f) -> nlohmann::json {
    if (!f) return nullptr;
    return {{"quantity", f->quantity}, {"t0", f->t0},         {"t1", f->t1},
            {"slope", f->slope},       {"r_squared", f->r_squared}, {"points", f->points}};
  };
  j["fit_grad_Yt_H2"] = fitj(r.fit_grad_Yt_H2);
  j["fit_grad_d1_Yt_H1"] = fitj(r.fit_grad_d1_Yt_H1);
  if (!failure.empty()) j["failure"] = failure;
  return j.dump(2);
}

inline void ensure_dir(const std::string& d) {
  std::error_code ec;
  std::filesystem::create_directories(d, ec);
  if (ec) throw Error("cannot create output directory '" + d + "': " + ec.message());
}

inline std::string join(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

}  // namespace run

struct StartState {
  std::optional<FlowState> lagrangian;
  std::optional<EulerState> eulerian;
  double smallness = 0;
  double det_residual = 0;
  std::optional<run::Accumulators> acc;
};

inline StartState initial_state(const RunConfig& c, const RunOptions& o = {}) {
  const Grid g = c.grid();
  const bool need_l = c.solver != SolverKind::Eulerian, need_e = c.solver != SolverKind::Lagrangian;
  StartState s;
  std::string ckpt = o.resume;
  if (ckpt.empty() && c.init == InitKind::Checkpoint) ckpt = c.init_checkpoint;
  if (!ckpt.empty()) {
    Checkpoint cp = read_checkpoint(ckpt);
    if (!(cp.grid == g)) throw InvalidArgument("checkpoint grid does not match the configured grid");
    if (c.solver == SolverKind::Both) throw InvalidArgument("solver = both cannot start from a single-formulation checkpoint");
    if (need_l && !cp.lagrangian) throw InvalidArgument("checkpoint holds an Eulerian state, config asks for lagrangian");
    if (need_e && !cp.eulerian) throw InvalidArgument("checkpoint holds a Lagrangian state, config asks for eulerian");
    s.lagrangian = cp.lagrangian;
    s.eulerian = cp.eulerian;
    if (!o.resume.empty()) s.acc = run::read_sidecar(o.resume);
  } else if (c.init == InitKind::Zero) {
    if (need_l) s.lagrangian = FlowState::zero(g);
    if (need_e) s.eulerian = EulerState::equilibrium(g);
  } else {
    InitialDataSpec spec;
    spec.seed = o.seed.value_or(c.seed);
    spec.modes = run::modes_for(c, spec.seed);
    spec.flow_substeps = c.flow_substeps;
    spec.dealias = c.dealias;
    const InitialData d = c.init_scale ? generate_initial_data(g, spec, *c.init_scale, need_e)
                                       : generate_for_smallness(g, spec, c.epsilon0, need_e);
    if (need_l) s.lagrangian = d.lagrangian;
    if (need_e) s.eulerian = d.eulerian;
  }
  if (s.lagrangian) {
    s.smallness = initial_smallness(*s.lagrangian);
    s.det_residual = det_drift(s.lagrangian->Y);
  }
  return s;
}

// Steps the configured formulation(s) to t_end, sampling diagnostics at the cadence.
inline RunReport run_simulation(const RunConfig& cfg_in, const RunOptions& o = {}) {
  RunConfig c = cfg_in;
  if (o.output_dir) c.output_dir = *o.output_dir;
  if (o.seed) c.seed = *o.seed;
  const Grid g = c.grid();
  const double dt = c.dt;
  const long sps = c.steps_per_sample();
  StartState st = initial_state(c, o);
  const bool lag = st.lagrangian.has_value(), eul = st.eulerian.has_value();

  RunReport rep;
  rep.initial_smallness = st.smallness;
  rep.initial_det_residual = st.det_residual;
  // a resumed state carries time-stepping drift; only fresh initial data is held to the constraint
  if (lag && o.resume.empty() && st.det_residual > 1e-8)
    throw InvalidArgument("initial data violates det(I + grad Y0) = 1: residual " + std::to_string(st.det_residual));

  const double t0 = lag ? st.lagrangian->t : st.eulerian->t;
  const long i0 = std::lround(t0 / dt);
  if (std::abs(i0 * dt - t0) > 1e-9 * std::max(1.0, t0)) throw InvalidArgument("start time is not on the dt grid");
  const long i_end = c.steps();
  if (i_end < i0) throw InvalidArgument("start time is beyond t_end");
  rep.t_start = t0;

  if (o.write_files) run::ensure_dir(c.output_dir);
  rep.diagnostics_path = run::join(c.output_dir, c.diagnostics_file);
  rep.checkpoint_path = run::join(c.output_dir, c.checkpoint_file);
  rep.eulerian_diagnostics_path = run::join(c.output_dir, "diagnostics_eulerian.csv");
  rep.report_path = run::join(c.output_dir, "run_report.json");

  StepperOptions sopt;
  sopt.force.pressure_tol = c.pressure_tol;
  sopt.force.pressure_max_iter = c.pressure_max_iter;
  std::optional<LagrangianStepper> lst;
  std::optional<EulerianStepper> est;
  VectorSpectrum Y, V, beta, u;
  if (lag) {
    lst.emplace(g, dt, sopt);
    Y = forward(st.lagrangian->Y);
    V = forward(st.lagrangian->Yt);
  }
  if (eul) {
    est.emplace(g, dt, EulerianOptions{c.dealias, true});
    beta = EulerianStepper::beta_of(*st.eulerian);
    u = forward(st.eulerian->u);
  }

  run::Accumulators acc = st.acc.value_or(run::Accumulators{});
  std::vector<LedgerSample> lsamples;

  auto finish_rows = [&]() {
    if (!lag) return;
    if (lsamples.size() >= 3) {
      rep.ledger = ledger_check(lsamples);
      for (std::size_t i = 0; i < rep.ledger.size(); ++i) {
        rep.rows[i].ledger_lhs = rep.ledger[i].lhs;
        rep.rows[i].ledger_rhs = rep.ledger[i].rhs;
        rep.rows[i].ledger_pass = rep.ledger[i].pass ? 1 : 0;
      }
      rep.ledger_pass_rate = ledger_pass_rate(rep.ledger);
      rep.nonlinear_integral = rep.ledger.back().integrated_rhs;
    }
  };
  auto write_outputs = [&](const std::string& failure) {
    if (!o.write_files) return;
    if (lag) write_diagnostics(rep.diagnostics_path, rep.rows);
    if (eul) run::write_eulerian_csv(rep.eulerian_diagnostics_path, rep.eulerian_rows);
    std::ofstream f(rep.report_path, std::ios::trunc);
    f << run::report_json(rep, c, failure) << '\n';
  };
  auto write_state = [&](double t) {
    if (!o.write_files) return;
    if (lag) {
      FlowState s{inverse(Y), inverse(V), t};
      write_checkpoint(rep.checkpoint_path, s);
      run::write_sidecar(rep.checkpoint_path, acc, c);
    }
    if (eul) {
      const EulerState e = EulerianStepper::assemble(beta, u, t, c.dealias);
      const std::string p = lag ? rep.checkpoint_path + ".eulerian" : rep.checkpoint_path;
      write_checkpoint(p, e);
    }
  };

  for (long i = i0;; ++i) {
    const double t = double(i) * dt;
    const bool sample = (i - i0) % sps == 0;
    const bool last = i == i_end;
    try {
      NonlinearForce F;
      QuadraticForms forms;
      VectorSpectrum Ys, Vs;
      if (lag) {
        if (sample) {
          forms = quadratic_forms(Y, V);
          Ys = Y;
          Vs = V;
        }
        if (!last)
          lst->step_spectral(Y, V, &F);
        else
          F = compute_force_spectral(Y, V, sopt.force);
        // running integral of |A grad Yt|_inf, trapezoid over steps
        if (acc.started) acc.grad_u_l1t += 0.5 * (t - acc.last_t) * (acc.last_grad_u + F.grad_u_linf);
        acc.last_grad_u = F.grad_u_linf;
        rep.pressure_iters_max = std::max(rep.pressure_iters_max, F.pressure_iterations);
      }
      if (sample && lag) {
        DiagnosticsRow row;
        row.t = t;
        row.energy = energy_from_forms(forms, t);
        if (acc.started) acc.int_D += 0.5 * (t - acc.last_t_sample) * (acc.last_D + row.energy.D_total);
        acc.sup_E = std::max(acc.sup_E, row.energy.E_total);
        acc.last_D = row.energy.D_total;
        acc.last_t_sample = t;
        row.energy.script_E = acc.sup_E + acc.int_D;
        row.tilde_E = tilde_from_forms(forms, t).total();
        row.det_drift_max = det_drift(inverse(Ys));
        row.pressure_iters = F.pressure_iterations;
        row.contraction_est = F.contraction_estimate;
        row.grad_u_linf = F.grad_u_linf;
        row.grad_u_l1t = acc.grad_u_l1t;
        lsamples.push_back({t, row.tilde_E, ledger_dissipation(forms, t), ledger_rhs(F.f_exact, Ys, Vs, t)});
        rep.det_drift_max = std::max(rep.det_drift_max, row.det_drift_max);
        rep.rows.push_back(row);
        if (o.on_sample) o.on_sample(row);
      }
      if (sample && eul) {
        const EulerState e = EulerianStepper::assemble(beta, u, t, c.dealias);
        EulerianRow er = run::eulerian_row(e);
        if (lag) {
          const FlowState ls{inverse(Ys), inverse(Vs), t};
          const Discrepancy d = formulation_discrepancy(ls, e, o.compare_stride);
          er.b_discrepancy = d.b;
          er.u_discrepancy = d.u;
          er.det_drift = rep.rows.back().det_drift_max;
        }
        rep.eulerian_rows.push_back(er);
      }
      if (eul && !last) est->step_spectral(beta, u);
      acc.started = true;
      acc.last_t = t;
    } catch (const Error& e) {
      // state (Y, V) may be half-updated only if the first stage threw, which leaves it intact
      rep.t_final = t;
      rep.steps = i - i0;
      finish_rows();
      const std::string why = std::string(e.what());
      if (o.write_files) {
        if (lag) {
          FlowState s{inverse(Y), inverse(V), t};
          if (all_finite(Y) && all_finite(V)) write_checkpoint(rep.checkpoint_path, s);
        }
        write_outputs(why);
        std::ofstream fr(run::join(c.output_dir, "failure_report.txt"), std::ios::trunc);
        fr << "run aborted at t = " << diag::num(t) << " (step " << i << ")\n" << why << '\n';
      }
      throw SolverAbort("run aborted at t = " + diag::num(t) + ": " + why);
    }
    if (last) break;
  }

  rep.completed = true;
  rep.t_final = double(i_end) * dt;
  rep.steps = i_end - i0;
  finish_rows();
  rep.grad_u_l1t = acc.grad_u_l1t;
  if (lag && !rep.rows.empty()) {
    rep.script_E_initial = rep.rows.front().energy.script_E;
    rep.script_E_final = rep.rows.back().energy.script_E;
    rep.energy_ratio = rep.script_E_initial > 0 ? rep.script_E_final / rep.script_E_initial : 0.0;
    rep.energy_bounded = rep.script_E_final <= c.energy_cap * rep.script_E_initial;
    std::vector<std::pair<double, double>> a, b;
    for (const auto& r : rep.rows) {
      a.emplace_back(r.t, std::sqrt(r.energy.E[3] / (r.t + 1)));
      b.emplace_back(r.t, std::sqrt(r.energy.E[5]) / (r.t + 1));
    }
    try {
      rep.fit_grad_Yt_H2 = fit_decay_rate(a, o.fit_window.first, o.fit_window.second, "grad_Yt_H2");
      rep.fit_grad_d1_Yt_H1 = fit_decay_rate(b, o.fit_window.first, o.fit_window.second, "grad_d1_Yt_H1");
    } catch (const InvalidArgument&) {
      // window not covered or zero data: no fit
    }
  }
  if (lag) rep.final_lagrangian = FlowState{inverse(Y), inverse(V), rep.t_final};
  if (eul) rep.final_eulerian = EulerianStepper::assemble(beta, u, rep.t_final, c.dealias);
  write_state(rep.t_final);
  write_outputs("");
  return rep;
}

struct CompareReport {
  std::vector<double> t;
  std::vector<double> b_discrepancy, u_discrepancy, det_drift;
  double max_b = 0, max_u = 0;
  double final_b = 0, final_u = 0;
  double correlation = 0;  // Pearson correlation of discrepancy with det drift over samples
};

inline CompareReport compare_formulations(const RunConfig& cfg_in, const RunOptions& o = {}) {
  RunConfig c = cfg_in;
  if (c.solver != SolverKind::Both) throw InvalidArgument("compare_formulations needs solver = both");
  RunOptions ro = o;
  const RunReport r = run_simulation(c, ro);
  CompareReport cr;
  for (const auto& e : r.eulerian_rows) {
    cr.t.push_back(e.t);
    cr.b_discrepancy.push_back(e.b_discrepancy);
    cr.u_discrepancy.push_back(e.u_discrepancy);
    cr.det_drift.push_back(e.det_drift);
    cr.max_b = std::max(cr.max_b, e.b_discrepancy);
    cr.max_u = std::max(cr.max_u, e.u_discrepancy);
  }
  if (!r.eulerian_rows.empty()) {
    cr.final_b = r.eulerian_rows.back().b_discrepancy;
    cr.final_u = r.eulerian_rows.back().u_discrepancy;
  }
  const std::size_t n = cr.t.size();
  if (n >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += std::max(cr.b_discrepancy[i], cr.u_discrepancy[i]) / n;
      my += cr.det_drift[i] / n;
    }
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = std::max(cr.b_discrepancy[i], cr.u_discrepancy[i]) - mx, y = cr.det_drift[i] - my;
      sxx += x * x;
      syy += y * y;
      sxy += x * y;
    }
    cr.correlation = sxx > 0 && syy > 0 ? sxy / std::sqrt(sxx * syy) : 0.0;
  }
  return cr;
}

struct ScalingReport {
  std::vector<double> amplitudes;
  std::vector<double> nonlinear_integral;
  std::vector<double> script_E;
  DecayFit fit;
  bool script_E_monotone = true;
};

// Runs the config at each amplitude (init_scale) and fits log N against log script_E.
inline ScalingReport nonlinear_scaling_study(const RunConfig& base, const std::vector<double>& amplitudes,
                                             const RunOptions& o = {}) {
  if (amplitudes.size() < 3) throw InvalidArgument("scaling study needs at least 3 amplitudes");
  ScalingReport sr;
  std::vector<double> xs, ys;
  for (double a : amplitudes) {
    RunConfig c = base;
    c.solver = SolverKind::Lagrangian;
    c.init_scale = a;
    RunReport r;
    try {
      r = run_simulation(c, o);
    } catch (const Error& e) {
      throw SolverAbort("scaling study run at amplitude " + diag::num(a) + " failed: " + e.what());
    }
    sr.amplitudes.push_back(a);
    sr.nonlinear_integral.push_back(r.nonlinear_integral);
    sr.script_E.push_back(r.script_E_final);
    if (a > 0 && r.nonlinear_integral > 0 && r.script_E_final > 0) {
      xs.push_back(r.script_E_final);
      ys.push_back(r.nonlinear_integral);
    }
  }
  std::vector<std::size_t> order(amplitudes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sr.amplitudes[a] < sr.amplitudes[b]; });
  for (std::size_t i = 1; i < order.size(); ++i)
    sr.script_E_monotone = sr.script_E_monotone && sr.script_E[order[i]] >= sr.script_E[order[i - 1]];
  sr.fit = fit_power_law(xs, ys, "nonlinear_integral_vs_script_E");
  return sr;
}

}  // namespace mhdl
