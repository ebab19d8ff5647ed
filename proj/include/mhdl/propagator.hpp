#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "mhdl/grid.hpp"

namespace mhdl {

struct DispersionRoots {
  Complex plus;   // larger real part
  Complex minus;
  bool degenerate = false;
};

inline bool is_degenerate(double k1sq, double ksq) {
  const double disc = ksq * ksq - 4 * k1sq;
  return std::abs(disc) <= 1e-12 * ksq * ksq;
}

// Roots of lambda^2 + |k|^2 lambda + k1^2 = 0.
inline DispersionRoots dispersion_eigenvalues(double k1sq, double ksq) {
  DispersionRoots r;
  const double disc = ksq * ksq - 4 * k1sq;
  const double mid = -0.5 * ksq;
  if (is_degenerate(k1sq, ksq)) {
    r.plus = r.minus = mid;
    r.degenerate = true;
  } else if (disc > 0) {
    const double sq = std::sqrt(disc);
    const double lm = -0.5 * (ksq + sq);
    r.minus = lm;
    r.plus = lm != 0.0 ? k1sq / lm : 0.0;
  } else {
    const double im = 0.5 * std::sqrt(-disc);
    r.plus = Complex(mid, im);
    r.minus = Complex(mid, -im);
  }
  return r;
}

inline DispersionRoots dispersion_eigenvalues(const Vec3& k) {
  return dispersion_eigenvalues(k[0] * k[0], k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
}

// exp(C t) for C = [[0, 1], [-k1^2, -|k|^2]] acting on (Y, Yt).
struct PropagatorBlock {
  double m[2][2];
};

inline PropagatorBlock propagator_block(double k1sq, double ksq, double t) {
  PropagatorBlock P{};
  const double disc = ksq * ksq - 4 * k1sq;
  const double mid = -0.5 * ksq;
  double a, b, d;
  if (is_degenerate(k1sq, ksq)) {
    const double e = std::exp(mid * t);
    a = (1 - mid * t) * e;
    b = t * e;
    d = (1 + mid * t) * e;
  } else if (disc > 0) {
    const double sq = std::sqrt(disc);
    const double z = 0.5 * sq * t;
    if (z < 1) {
      const double e = std::exp(mid * t);
      const double shc = z == 0 ? 1.0 : std::sinh(z) / z;
      a = e * (std::cosh(z) - mid * t * shc);
      b = e * t * shc;
      d = e * (std::cosh(z) + mid * t * shc);
    } else {
      const double lm = -0.5 * (ksq + sq);
      const double lp = -2 * k1sq / (ksq + sq);
      const double ep = std::exp(lp * t), em = std::exp(lm * t);
      b = (ep - em) / sq;
      a = (lp * em - lm * ep) / sq;
      d = (lp * ep - lm * em) / sq;
    }
  } else {
    const double th = 0.5 * std::sqrt(-disc) * t;
    const double e = std::exp(mid * t);
    const double sc = th < 1e-8 ? 1.0 - th * th / 6 : std::sin(th) / th;
    a = e * (std::cos(th) - mid * t * sc);
    b = e * t * sc;
    d = e * (std::cos(th) + mid * t * sc);
  }
  P.m[0][0] = a;
  P.m[0][1] = b;
  P.m[1][0] = -k1sq * b;
  P.m[1][1] = d;
  return P;
}

inline PropagatorBlock propagator_matrix(const Vec3& k, double dt) {
  if (!(dt > 0)) throw InvalidArgument("propagator time step must be positive");
  return propagator_block(k[0] * k[0], k[0] * k[0] + k[1] * k[1] + k[2] * k[2], dt);
}

// Any analytic function g of the companion matrix C equals alpha I + beta C, so
// g = [[alpha, beta], [-k1^2 beta, delta]] with delta = alpha - |k|^2 beta.
// Index 0 is exp(C h), 1 is h phi_1(C h), 2 is h phi_2(C h).
struct EtdCoefficients {
  std::vector<double> alpha[3];
  std::vector<double> beta[3];
  std::vector<double> delta[3];
  double dt = 0;
};

inline void phi_functions(double k1sq, double ksq, double h, double alpha[3], double beta[3], double delta[3]) {
  Eigen::Matrix<double, 6, 6> M = Eigen::Matrix<double, 6, 6>::Zero();
  M(0, 1) = h;
  M(1, 0) = -k1sq * h;
  M(1, 1) = -ksq * h;
  M(0, 2) = M(1, 3) = 1.0;
  M(2, 4) = M(3, 5) = 1.0;
  const Eigen::Matrix<double, 6, 6> E = M.exp();
  const PropagatorBlock P = propagator_block(k1sq, ksq, h);
  alpha[0] = P.m[0][0];
  beta[0] = P.m[0][1];
  delta[0] = P.m[1][1];
  for (int j = 1; j < 3; ++j) {
    alpha[j] = h * E(0, 2 * j);
    beta[j] = h * E(0, 2 * j + 1);
    delta[j] = h * E(1, 2 * j + 1);
  }
}

inline EtdCoefficients etd_coefficients(const Grid& g, double dt) {
  const auto& t = g.tables();
  const std::size_t nm = g.num_modes();
  EtdCoefficients c;
  c.dt = dt;
  for (int j = 0; j < 3; ++j) {
    c.alpha[j].resize(nm);
    c.beta[j].resize(nm);
    c.delta[j].resize(nm);
  }
  for (std::size_t q = 0; q < nm; ++q) {
    const double k1sq = t.kappa[0][q] * t.kappa[0][q];
    const double ksq = t.ksq[q];
    const auto roots = dispersion_eigenvalues(k1sq, ksq);
    if (roots.plus.real() > 1e-14 || roots.minus.real() > 1e-14)
      throw Error("linear operator has a growing mode");
    double al[3], be[3], de[3];
    phi_functions(k1sq, ksq, dt, al, be, de);
    for (int j = 0; j < 3; ++j) {
      c.alpha[j][q] = al[j];
      c.beta[j][q] = be[j];
      c.delta[j][q] = de[j];
    }
  }
  return c;
}

}  // namespace mhdl
