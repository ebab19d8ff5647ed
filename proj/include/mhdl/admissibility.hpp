#pragma once

#include <limits>
#include <sstream>

#include "mhdl/field.hpp"
#include "mhdl/interpolate.hpp"

namespace mhdl {

struct Trajectory {
  Vec3 seed{};
  std::vector<double> times;  // increasing, contains 0
  std::vector<Vec3> positions;
  std::size_t origin = 0;  // index of t = 0
  bool exited_forward = false;
  bool exited_backward = false;
  double K = 0;
};

struct TrajectoryOptions {
  double K = 1.0;
  double margin = -1;  // negative: one ODE step plus a grid spacing
  std::size_t max_steps = 200000;
};

// x1 measured in the periodic window centred on 0
inline double centred_coordinate(double x, double L) { return x - L * std::floor(x / L + 0.5); }

inline Trajectory integrate_trajectory(const Interpolant& b0, const Grid& g, const Vec3& y, double dt_ode,
                                       const TrajectoryOptions& opt) {
  if (!(dt_ode > 0)) throw InvalidArgument("dt_ode must be positive");
  if (std::abs(y[0]) > 1e-14) throw InvalidArgument("trajectory seed must lie on the plane x1 = 0");
  const double margin = opt.margin >= 0 ? opt.margin : dt_ode + g.spacing(0);
  const double exit = opt.K + margin;
  if (!(exit < 0.5 * g.length(0)))
    throw InvalidArgument("slab [-K - margin, K + margin] does not fit in one period along x1");
  const int d = g.dim();
  auto field = [&](const Vec3& x) {
    double v[3];
    b0.evaluate(x, v);
    return Vec3{v[0], v[1], d == 3 ? v[2] : 0.0};
  };
  auto rk4 = [&](Vec3 x, double h) {
    const Vec3 k1 = field(x);
    Vec3 x2, x3, x4;
    for (int a = 0; a < 3; ++a) x2[a] = x[a] + 0.5 * h * k1[a];
    const Vec3 k2 = field(x2);
    for (int a = 0; a < 3; ++a) x3[a] = x[a] + 0.5 * h * k2[a];
    const Vec3 k3 = field(x3);
    for (int a = 0; a < 3; ++a) x4[a] = x[a] + h * k3[a];
    const Vec3 k4 = field(x4);
    for (int a = 0; a < 3; ++a) x[a] += h / 6 * (k1[a] + 2 * k2[a] + 2 * k3[a] + k4[a]);
    return x;
  };
  Trajectory tr;
  tr.seed = y;
  tr.K = opt.K;
  std::vector<double> tb, tf;
  std::vector<Vec3> xb, xf;
  for (int dir : {1, -1}) {
    auto& ts = dir > 0 ? tf : tb;
    auto& xs = dir > 0 ? xf : xb;
    Vec3 x = y;
    std::size_t n = 0;
    while (dir * x[0] <= exit) {
      if (++n > opt.max_steps)
        throw NonTransversal("trajectory from (" + std::to_string(y[1]) + ", " + std::to_string(y[2]) +
                             ") did not leave the slab within " + std::to_string(opt.max_steps) + " steps");
      x = rk4(x, dir * dt_ode);
      ts.push_back(dir * double(n) * dt_ode);
      xs.push_back(x);
    }
    (dir > 0 ? tr.exited_forward : tr.exited_backward) = true;
  }
  for (std::size_t i = tb.size(); i-- > 0;) {
    tr.times.push_back(tb[i]);
    tr.positions.push_back(xb[i]);
  }
  tr.origin = tr.times.size();
  tr.times.push_back(0.0);
  tr.positions.push_back(y);
  tr.times.insert(tr.times.end(), tf.begin(), tf.end());
  tr.positions.insert(tr.positions.end(), xf.begin(), xf.end());
  return tr;
}

inline Trajectory integrate_trajectory(const VectorField& b0, const Vec3& y, double dt_ode,
                                       const TrajectoryOptions& opt) {
  double bmin = std::numeric_limits<double>::infinity();
  for (double x : b0.c[0]) bmin = std::min(bmin, x);
  if (bmin < 0.5)
    throw NonTransversal("b0^1 drops to " + std::to_string(bmin) + " < 1/2; trajectories need not cross the slab");
  return integrate_trajectory(Interpolant(b0), b0.grid, y, dt_ode, opt);
}

namespace adm {

inline void check_support(const VectorField& f, double K) {
  const Grid& g = f.grid;
  const double fmax = max_abs(f);
  double outside = 0, where = 0;
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    const double x1 = centred_coordinate(g.point(p)[0], g.length(0));
    if (std::abs(x1) <= K + 1e-12) continue;
    for (int i = 0; i < f.dim(); ++i)
      if (std::abs(f.c[i][p]) > outside) {
        outside = std::abs(f.c[i][p]);
        where = x1;
      }
  }
  if (outside > 1e-12 * fmax)
    throw InvalidArgument("field is not supported in the slab |x1| <= " + std::to_string(K) + ": |f| = " +
                          std::to_string(outside) + " at x1 = " + std::to_string(where));
}

}  // namespace adm

// Trapezoid along the sampled trajectory; the integrand vanishes smoothly at both ends.
inline std::vector<double> admissibility_integral(const Interpolant& f, int dim, const Trajectory& tr) {
  std::vector<double> out(dim, 0.0);
  std::vector<std::vector<double>> vals(dim, std::vector<double>(tr.times.size()));
  for (std::size_t j = 0; j < tr.times.size(); ++j) {
    double v[3];
    f.evaluate(tr.positions[j], v);
    for (int i = 0; i < dim; ++i) vals[i][j] = std::abs(tr.positions[j][0]) <= tr.K ? v[i] : 0.0;
  }
  for (int i = 0; i < dim; ++i)
    for (std::size_t j = 1; j < tr.times.size(); ++j)
      out[i] += 0.5 * (tr.times[j] - tr.times[j - 1]) * (vals[i][j] + vals[i][j - 1]);
  return out;
}

inline std::vector<double> admissibility_integral(const VectorField& f, const Trajectory& tr) {
  adm::check_support(f, tr.K);
  return admissibility_integral(Interpolant(f), f.dim(), tr);
}

struct AdmissibilityReport {
  std::vector<Vec3> seeds;
  std::vector<std::vector<double>> integrals;       // f = b0 - e1
  std::vector<std::vector<double>> user_integrals;  // optional extra field
  double max_abs_integral = 0;
  double max_abs_user = 0;
  double K = 0;
  double tolerance = 0;  // absolute, after scaling
  bool admissible = false;       // b0 - e1
  bool b0_admissible = false;    // b0, via transverse drift
  bool user_admissible = true;
  std::string note;

  std::string csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "y2,y3";
    const std::size_t nc = integrals.empty() ? 0 : integrals[0].size();
    for (std::size_t i = 0; i < nc; ++i) os << ",I" << i + 1;
    os << ",verdict\n";
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      os << seeds[s][1] << ',' << seeds[s][2];
      bool ok = true;
      for (double v : integrals[s]) {
        os << ',' << v;
        ok = ok && std::abs(v) <= tolerance;
      }
      os << ',' << (ok ? "admissible" : "not_admissible") << '\n';
    }
    return os.str();
  }
};

struct AdmissibilityOptions {
  double dt_ode = -1;  // negative: half the smallest grid spacing
  std::size_t max_steps = 200000;
  const VectorField* user_field = nullptr;
};

// Seed grid on the plane x1 = 0: n2 x n3 points spanning the transverse box (n3 ignored in 2D).
inline std::vector<Vec3> plane_seeds(const Grid& g, int n2, int n3) {
  if (n2 < 1 || n3 < 1) throw InvalidArgument("seed grid must be non-empty");
  std::vector<Vec3> out;
  const int m3 = g.dim() == 3 ? n3 : 1;
  for (int a = 0; a < n2; ++a)
    for (int b = 0; b < m3; ++b)
      out.push_back({0.0, g.length(1) * a / n2, g.dim() == 3 ? g.length(2) * b / m3 : 0.0});
  return out;
}

inline AdmissibilityReport check_admissible(const VectorField& b0, double K, double tol, const std::vector<Vec3>& seeds,
                                            const AdmissibilityOptions& opt = {}) {
  const Grid& g = b0.grid;
  const int d = g.dim();
  if (!(K > 0)) throw InvalidArgument("support radius K must be positive");
  if (!(tol > 0)) throw InvalidArgument("admissibility tolerance must be positive");
  if (seeds.empty()) throw InvalidArgument("seed grid is empty");
  VectorField f = b0;
  for (auto& x : f.c[0]) x -= 1.0;
  adm::check_support(f, K);
  const Interpolant B(b0), F(f);
  std::unique_ptr<Interpolant> U;
  if (opt.user_field) {
    require_same_grid(g, opt.user_field->grid, "check_admissible");
    adm::check_support(*opt.user_field, K);
    U = std::make_unique<Interpolant>(*opt.user_field);
  }
  {
    double bmin = std::numeric_limits<double>::infinity();
    for (double x : b0.c[0]) bmin = std::min(bmin, x);
    if (bmin < 0.5) throw NonTransversal("b0^1 drops to " + std::to_string(bmin) + " < 1/2");
  }
  TrajectoryOptions to;
  to.K = K;
  to.max_steps = opt.max_steps;
  const double dt = opt.dt_ode > 0 ? opt.dt_ode : 0.5 * g.min_spacing();

  AdmissibilityReport rep;
  rep.K = K;
  rep.tolerance = tol * std::max(max_abs(f), 1e-300) * 2 * K;
  const double user_tol = U ? tol * std::max(max_abs(*opt.user_field), 1e-300) * 2 * K : 0.0;
  double drift = 0;
  for (const auto& y : seeds) {
    const Trajectory tr = integrate_trajectory(B, g, y, dt, to);
    rep.seeds.push_back(y);
    auto I = admissibility_integral(F, d, tr);
    for (double v : I) rep.max_abs_integral = std::max(rep.max_abs_integral, std::abs(v));
    for (int i = 1; i < d; ++i) drift = std::max(drift, std::abs(I[i]));
    rep.integrals.push_back(std::move(I));
    if (U) {
      auto J = admissibility_integral(*U, d, tr);
      for (double v : J) rep.max_abs_user = std::max(rep.max_abs_user, std::abs(v));
      rep.user_integrals.push_back(std::move(J));
    }
  }
  rep.admissible = rep.max_abs_integral <= rep.tolerance;
  rep.b0_admissible = drift <= rep.tolerance;
  rep.user_admissible = !U || rep.max_abs_user <= user_tol;
  rep.note =
      "b0 condition read as zero net transverse drift: transverse components of the integral of b0 - e1 "
      "along each trajectory, truncated at slab exit";
  return rep;
}

}  // namespace mhdl
