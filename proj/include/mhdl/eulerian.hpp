#pragma once

#include "mhdl/lagrangian.hpp"

namespace mhdl {

struct EulerState {
  VectorField u;
  VectorField b;
  ScalarField p;  // zero mean
  double t = 0.0;

  static EulerState equilibrium(const Grid& g) {
    EulerState s{VectorField(g), VectorField(g), ScalarField(g), 0.0};
    for (double& x : s.b.c[0]) x = 1.0;
    return s;
  }
  const Grid& grid() const { return u.grid; }
};

struct EulerianOptions {
  bool dealias = true;
  bool filter = true;
};

namespace euler {

// Advective products for beta = b - e1: returns (beta.grad u - u.grad beta, beta.grad beta - u.grad u).
inline void products(const VectorSpectrum& beta, const VectorSpectrum& u, bool dealias, VectorSpectrum& nb,
                     VectorSpectrum& nu) {
  const Grid& g = u.grid;
  const int d = g.dim();
  const std::size_t np = g.num_points();
  std::vector<RealArray> ur, br;
  for (int i = 0; i < d; ++i) {
    ur.push_back(inverse(g, u.c[i]));
    br.push_back(inverse(g, beta.c[i]));
  }
  const auto gu = geom::gradient_matrix(u);
  const auto gb = geom::gradient_matrix(beta);
  std::vector<RealArray> pb(d, RealArray(np)), pu(d, RealArray(np));
  for (std::size_t p = 0; p < np; ++p)
    for (int i = 0; i < d; ++i) {
      double sb = 0, su = 0;
      for (int j = 0; j < d; ++j) {
        sb += br[j][p] * gu[i * d + j][p] - ur[j][p] * gb[i * d + j][p];
        su += br[j][p] * gb[i * d + j][p] - ur[j][p] * gu[i * d + j][p];
      }
      pb[i][p] = sb;
      pu[i][p] = su;
    }
  nb = VectorSpectrum();
  nu = VectorSpectrum();
  nb.grid = nu.grid = g;
  for (int i = 0; i < d; ++i) {
    nb.c.push_back(forward(g, pb[i]));
    nu.c.push_back(forward(g, pu[i]));
    if (dealias) {
      dealias_inplace(g, nb.c.back());
      dealias_inplace(g, nu.c.back());
    }
  }
}

// p = i k . (u.grad u - b.grad b)^ / |k|^2, zero mean.
inline Spectrum pressure(const VectorSpectrum& beta, const VectorSpectrum& u, bool dealias) {
  VectorSpectrum nb, nu;
  products(beta, u, dealias, nb, nu);
  const Grid& g = u.grid;
  const auto& t = g.tables();
  Spectrum p(g.num_modes(), Complex{});
  for (std::size_t q = 0; q < p.size(); ++q) {
    if (t.ksq[q] == 0.0) continue;
    Complex dot{};
    for (int i = 0; i < g.dim(); ++i) dot -= t.kappa[i][q] * nu.c[i][q];
    p[q] = Complex(0.0, 1.0) * dot / t.ksq[q];
  }
  return p;
}

}  // namespace euler

class EulerianStepper {
 public:
  EulerianStepper(const Grid& g, double dt, EulerianOptions opt = {}) : grid_(g), dt_(dt), opt_(opt) {
    if (!(dt > 0)) throw InvalidArgument("dt must be positive");
    coef_ = etd_coefficients(g, dt);
  }

  double dt() const { return dt_; }

  // (beta, u) spectra, beta = b - e1.
  void step_spectral(VectorSpectrum& beta, VectorSpectrum& u) const {
    const int d = grid_.dim();
    const std::size_t nm = grid_.num_modes();
    const auto& t = grid_.tables();
    VectorSpectrum nb0, nu0, nb1, nu1;
    euler::products(beta, u, opt_.dealias, nb0, nu0);
    leray_inplace(nb0);
    leray_inplace(nu0);
    auto apply = [&](int j, std::size_t q, Complex x, Complex y, Complex& ox, Complex& oy) {
      const Complex ik(0.0, t.kappa[0][q]);
      ox = coef_.alpha[j][q] * x + ik * coef_.beta[j][q] * y;
      oy = ik * coef_.beta[j][q] * x + coef_.delta[j][q] * y;
    };
    for (int i = 0; i < d; ++i)
      for (std::size_t q = 0; q < nm; ++q) {
        Complex a0, a1, f0, f1;
        apply(0, q, beta.c[i][q], u.c[i][q], a0, a1);
        apply(1, q, nb0.c[i][q], nu0.c[i][q], f0, f1);
        beta.c[i][q] = a0 + f0;
        u.c[i][q] = a1 + f1;
      }
    euler::products(beta, u, opt_.dealias, nb1, nu1);
    leray_inplace(nb1);
    leray_inplace(nu1);
    for (int i = 0; i < d; ++i)
      for (std::size_t q = 0; q < nm; ++q) {
        Complex f0, f1;
        apply(2, q, nb1.c[i][q] - nb0.c[i][q], nu1.c[i][q] - nu0.c[i][q], f0, f1);
        beta.c[i][q] += f0;
        u.c[i][q] += f1;
      }
    if (opt_.filter)
      for (auto& c : beta.c) filter_inplace(grid_, c);
    if (!all_finite(beta) || !all_finite(u)) throw SolverAbort("non-finite values in Eulerian state");
  }

  static VectorSpectrum beta_of(const EulerState& s) {
    VectorField beta = s.b;
    for (double& x : beta.c[0]) x -= 1.0;
    return forward(beta);
  }

  static EulerState assemble(const VectorSpectrum& beta, const VectorSpectrum& u, double t, bool dealias = true) {
    EulerState s;
    s.u = inverse(u);
    s.b = inverse(beta);
    for (double& x : s.b.c[0]) x += 1.0;
    s.p = to_scalar_field(u.grid, euler::pressure(beta, u, dealias));
    s.t = t;
    return s;
  }

  EulerState step(const EulerState& s) const {
    require_same_grid(s.grid(), grid_, "step_eulerian");
    VectorSpectrum beta = beta_of(s), u = forward(s.u);
    step_spectral(beta, u);
    return assemble(beta, u, s.t + dt_, opt_.dealias);
  }

 private:
  Grid grid_;
  double dt_;
  EulerianOptions opt_;
  EtdCoefficients coef_;
};

inline EulerState step_eulerian(const EulerState& s, double dt, const EulerianOptions& opt = {}) {
  return EulerianStepper(s.grid(), dt, opt).step(s);
}

}  // namespace mhdl
