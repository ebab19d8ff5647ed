#pragma once

#include <limits>

#include "mhdl/spectral_ops.hpp"

namespace mhdl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Iterated norm: L^q along axis 1 first, then L^p over the transversal variables.
inline double anisotropic_norm(const Grid& g, const RealArray& magnitude, double p_outer, double q_inner) {
  const bool p_ok = p_outer == 2 || p_outer == 4 || p_outer == 6 || p_outer == kInf;
  const bool q_ok = q_inner == 2 || q_inner == kInf;
  if (!p_ok || !q_ok) throw InvalidArgument("unsupported exponent pair for anisotropic norm");
  const int n0 = g.size(0);
  const std::size_t ntr = g.num_points() / n0;
  const double h0 = g.spacing(0);
  const double htr = g.cell_volume() / h0;
  double outer = 0;
  for (std::size_t r = 0; r < ntr; ++r) {
    double inner = 0;
    for (int i = 0; i < n0; ++i) {
      const double x = std::abs(magnitude[i * ntr + r]);
      if (q_inner == kInf)
        inner = std::max(inner, x);
      else
        inner += x * x;
    }
    if (q_inner != kInf) inner = std::sqrt(h0 * inner);
    if (p_outer == kInf)
      outer = std::max(outer, inner);
    else
      outer += std::pow(inner, p_outer);
  }
  return p_outer == kInf ? outer : std::pow(htr * outer, 1.0 / p_outer);
}

inline double anisotropic_norm(const ScalarField& f, double p_outer, double q_inner) {
  return anisotropic_norm(f.grid, f.v, p_outer, q_inner);
}

// Vector fields use the pointwise Euclidean magnitude.
inline double anisotropic_norm(const VectorField& f, double p_outer, double q_inner) {
  RealArray mag(f.grid.num_points(), 0.0);
  for (const auto& comp : f.c)
    for (std::size_t p = 0; p < mag.size(); ++p) mag[p] += comp[p] * comp[p];
  for (double& x : mag) x = std::sqrt(x);
  return anisotropic_norm(f.grid, mag, p_outer, q_inner);
}

struct InterpolationReport {
  double lhs = 0;
  double rhs = 0;
  double ratio = 0;
  bool undefined = false;  // lhs = rhs = 0
  bool infinite = false;   // rhs = 0 < lhs
};

// lhs = max |grad f|, rhs = |grad^2 f|_{H^1}^{5/6} |d_1 grad^2 f|_{H^1}^{1/6}.
inline InterpolationReport sobolev_interpolation_monitor(const VectorField& f) {
  const Grid& g = f.grid;
  const int d = g.dim();
  InterpolationReport r;
  RealArray grad_sq(g.num_points(), 0.0);
  double a2 = 0, b2 = 0;
  for (int c = 0; c < d; ++c) {
    const Spectrum s = forward(g, f.c[c]);
    for (int a = 0; a < d; ++a) {
      const RealArray da = inverse(g, differentiated(g, s, a));
      for (std::size_t p = 0; p < grad_sq.size(); ++p) grad_sq[p] += da[p] * da[p];
    }
    a2 += spectral_pairing(g, s, s, 1, [](const Vec3& k) {
      const double q = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
      return q * q;
    });
    b2 += spectral_pairing(g, s, s, 1, [](const Vec3& k) {
      const double q = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
      return k[0] * k[0] * q * q;
    });
  }
  for (double x : grad_sq) r.lhs = std::max(r.lhs, std::sqrt(x));
  r.rhs = std::pow(std::max(a2, 0.0), 5.0 / 12.0) * std::pow(std::max(b2, 0.0), 1.0 / 12.0);
  if (r.rhs == 0.0) {
    if (r.lhs == 0.0) {
      r.undefined = true;
      r.ratio = std::numeric_limits<double>::quiet_NaN();
    } else {
      r.infinite = true;
      r.ratio = kInf;
    }
  } else {
    r.ratio = r.lhs / r.rhs;
  }
  return r;
}

}  // namespace mhdl
