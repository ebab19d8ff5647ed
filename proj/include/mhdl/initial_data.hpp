#pragma once

#include <cstdint>
#include <random>

#include "mhdl/energy.hpp"
#include "mhdl/eulerian.hpp"

namespace mhdl {

struct ModeSpec {
  std::array<int, 3> m{0, 0, 0};
  bool velocity = false;  // false: displacement generator, true: velocity
  double amplitude = 0.0;
};

struct InitialDataSpec {
  std::vector<ModeSpec> modes;
  std::uint64_t seed = 0;
  int flow_substeps = 32;
  bool dealias = true;
};

// Sum of solenoidal plane waves amp * e * cos(k.x + phase), e orthogonal to k.
class TrigField {
 public:
  struct Term {
    Vec3 k{};
    Vec3 e{};
    double amp = 0;
    double phase = 0;
  };

  void add(const Term& t) { terms_.push_back(t); }
  bool empty() const { return terms_.empty(); }

  Vec3 value(const Vec3& x) const {
    Vec3 v{0, 0, 0};
    for (const auto& t : terms_) {
      const double c = t.amp * std::cos(t.k[0] * x[0] + t.k[1] * x[1] + t.k[2] * x[2] + t.phase);
      for (int i = 0; i < 3; ++i) v[i] += c * t.e[i];
    }
    return v;
  }

  // grad[i*3+j] = d_j v_i
  void value_and_gradient(const Vec3& x, Vec3& v, Mat3& grad) const {
    v = {0, 0, 0};
    grad = Mat3{};
    for (const auto& t : terms_) {
      const double ph = t.k[0] * x[0] + t.k[1] * x[1] + t.k[2] * x[2] + t.phase;
      const double c = t.amp * std::cos(ph), s = -t.amp * std::sin(ph);
      for (int i = 0; i < 3; ++i) {
        v[i] += c * t.e[i];
        for (int j = 0; j < 3; ++j) grad[i * 3 + j] += s * t.e[i] * t.k[j];
      }
    }
  }

 private:
  std::vector<Term> terms_;
};

struct InitialData {
  FlowState lagrangian;
  EulerState eulerian;
  double smallness = 0;     // |Y1|_{H3}^2 + |d1 Y0|_{H3}^2 + |Lap Y0|_{H2}^2
  double det_residual = 0;  // max |det(I + grad Y0) - 1|
  double scale = 1;
};

namespace initdata {

inline void build_fields(const Grid& g, const InitialDataSpec& spec, double scale, TrigField& V, TrigField& U) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> nrm(0.0, 1.0);
  const int d = g.dim();
  for (const auto& ms : spec.modes) {
    bool zero = true;
    for (int a = 0; a < 3; ++a) {
      if (a >= d && ms.m[a] != 0) throw InvalidArgument("mode uses axis 3 on a 2D grid");
      if (a < d && std::abs(ms.m[a]) > g.dealias_cutoff(a))
        throw InvalidArgument("mode index beyond the dealiased band on axis " + std::to_string(a + 1));
      zero = zero && ms.m[a] == 0;
    }
    if (zero) throw InvalidArgument("initial-data modes must have nonzero wavevector");
    TrigField::Term t;
    for (int a = 0; a < d; ++a) t.k[a] = 2 * pi * ms.m[a] / g.length(a);
    const double kn = std::sqrt(t.k[0] * t.k[0] + t.k[1] * t.k[1] + t.k[2] * t.k[2]);
    t.phase = 2 * pi * uni(rng);
    if (d == 2) {
      t.e = {-t.k[1] / kn, t.k[0] / kn, 0.0};
    } else {
      Vec3 r{nrm(rng), nrm(rng), nrm(rng)};
      double dot = 0;
      for (int a = 0; a < 3; ++a) dot += r[a] * t.k[a] / kn;
      for (int a = 0; a < 3; ++a) r[a] -= dot * t.k[a] / kn;
      const double rn = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
      for (int a = 0; a < 3; ++a) t.e[a] = r[a] / rn;
    }
    t.amp = scale * ms.amplitude;
    if (t.amp == 0.0) continue;
    (ms.velocity ? U : V).add(t);
  }
}

// Time-one flow of V and its inverse with Jacobian, both by classical RK4.
inline Vec3 flow(const TrigField& V, Vec3 x, int n, double sign) {
  const double h = sign / n;
  for (int s = 0; s < n; ++s) {
    const Vec3 k1 = V.value(x);
    Vec3 x2, x3, x4;
    for (int a = 0; a < 3; ++a) x2[a] = x[a] + 0.5 * h * k1[a];
    const Vec3 k2 = V.value(x2);
    for (int a = 0; a < 3; ++a) x3[a] = x[a] + 0.5 * h * k2[a];
    const Vec3 k3 = V.value(x3);
    for (int a = 0; a < 3; ++a) x4[a] = x[a] + h * k3[a];
    const Vec3 k4 = V.value(x4);
    for (int a = 0; a < 3; ++a) x[a] += h / 6 * (k1[a] + 2 * k2[a] + 2 * k3[a] + k4[a]);
  }
  return x;
}

inline void flow_with_jacobian(const TrigField& V, Vec3& x, Mat3& J, int n, double sign) {
  const double h = sign / n;
  J = identity3();
  auto rhs = [&](const Vec3& p, const Mat3& Jp, Vec3& dx, Mat3& dJ) {
    Mat3 G;
    V.value_and_gradient(p, dx, G);
    dJ = matmul3(G, Jp);
  };
  for (int s = 0; s < n; ++s) {
    Vec3 k[4];
    Mat3 K[4];
    Vec3 xs = x;
    Mat3 Js = J;
    for (int st = 0; st < 4; ++st) {
      if (st > 0) {
        const double c = st == 3 ? h : 0.5 * h;
        for (int a = 0; a < 3; ++a) xs[a] = x[a] + c * k[st - 1][a];
        for (int e = 0; e < 9; ++e) Js[e] = J[e] + c * K[st - 1][e];
      }
      rhs(xs, Js, k[st], K[st]);
    }
    for (int a = 0; a < 3; ++a) x[a] += h / 6 * (k[0][a] + 2 * k[1][a] + 2 * k[2][a] + k[3][a]);
    for (int e = 0; e < 9; ++e) J[e] += h / 6 * (K[0][e] + 2 * K[1][e] + 2 * K[2][e] + K[3][e]);
  }
}

inline FlowState lagrangian(const Grid& g, const TrigField& V, const TrigField& U, const InitialDataSpec& spec) {
  FlowState s = FlowState::zero(g);
  const int d = g.dim();
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    const Vec3 y = g.point(p);
    const Vec3 X = V.empty() ? y : flow(V, y, spec.flow_substeps, 1.0);
    const Vec3 u = U.value(X);
    for (int i = 0; i < d; ++i) {
      s.Y.c[i][p] = X[i] - y[i];
      s.Yt.c[i][p] = u[i];
    }
  }
  if (spec.dealias) {
    s.Y = dealias(s.Y);
    s.Yt = dealias(s.Yt);
  }
  return s;
}

inline EulerState eulerian(const Grid& g, const TrigField& V, const TrigField& U, const InitialDataSpec& spec) {
  EulerState e = EulerState::equilibrium(g);
  const int d = g.dim();
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    const Vec3 x = g.point(p);
    const Vec3 u = U.value(x);
    for (int i = 0; i < d; ++i) e.u.c[i][p] = u[i];
    if (V.empty()) continue;
    Vec3 z = x;
    Mat3 J;
    flow_with_jacobian(V, z, J, spec.flow_substeps, -1.0);
    // b0(x) = (D Psi(x))^{-1} e1 with Psi the inverse map
    const Mat3 Ji = inverse3(J);
    for (int i = 0; i < d; ++i) e.b.c[i][p] = Ji[i * 3 + 0];
  }
  VectorSpectrum beta = EulerianStepper::beta_of(e), u = forward(e.u);
  if (spec.dealias) {
    dealias_inplace(beta);
    dealias_inplace(u);
  }
  leray_inplace(beta);
  leray_inplace(u);
  return EulerianStepper::assemble(beta, u, 0.0, spec.dealias);
}

}  // namespace initdata

inline InitialData generate_initial_data(const Grid& g, const InitialDataSpec& spec, double scale,
                                         bool with_eulerian = true) {
  if (spec.flow_substeps < 1) throw InvalidArgument("flow_substeps must be positive");
  TrigField V, U;
  initdata::build_fields(g, spec, scale, V, U);
  InitialData out;
  out.scale = scale;
  out.lagrangian = initdata::lagrangian(g, V, U, spec);
  out.smallness = initial_smallness(out.lagrangian);
  out.det_residual = det_drift(out.lagrangian.Y);
  if (with_eulerian) out.eulerian = initdata::eulerian(g, V, U, spec);
  return out;
}

// Rescales the mode amplitudes until the initial smallness functional equals epsilon0.
inline InitialData generate_for_smallness(const Grid& g, const InitialDataSpec& spec, double epsilon0,
                                          bool with_eulerian = true) {
  if (!(epsilon0 > 0)) throw InvalidArgument("epsilon0 must be positive");
  double s = 1.0;
  InitialData d = generate_initial_data(g, spec, s, false);
  if (d.smallness == 0.0) throw InvalidArgument("initial-data modes produce zero data; cannot rescale to epsilon0");
  for (int it = 0; it < 12; ++it) {
    s *= std::sqrt(epsilon0 / d.smallness);
    d = generate_initial_data(g, spec, s, false);
    if (std::abs(d.smallness / epsilon0 - 1) <= 1e-10) break;
  }
  if (with_eulerian) d = generate_initial_data(g, spec, s, true);
  return d;
}

// Random low modes: `count` displacement and `count` velocity modes with |m_i| <= max_mode.
inline std::vector<ModeSpec> random_modes(int dim, int max_mode, int count, std::uint64_t seed) {
  if (max_mode < 1 || count < 0) throw InvalidArgument("random mode parameters out of range");
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<int> pick(-max_mode, max_mode);
  std::normal_distribution<double> nrm(0.0, 1.0);
  std::vector<ModeSpec> out;
  for (int kind = 0; kind < 2; ++kind)
    for (int c = 0; c < count; ++c) {
      ModeSpec m;
      do {
        for (int a = 0; a < dim; ++a) m.m[a] = pick(rng);
      } while (m.m[0] == 0 && m.m[1] == 0 && m.m[2] == 0);
      const double r2 = double(m.m[0] * m.m[0] + m.m[1] * m.m[1] + m.m[2] * m.m[2]);
      m.velocity = kind == 1;
      m.amplitude = nrm(rng) / r2;
      out.push_back(m);
    }
  return out;
}

}  // namespace mhdl
