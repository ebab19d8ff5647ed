#pragma once

#include <algorithm>
#include <functional>

#include "mhdl/grid.hpp"

namespace mhdl {

using RealArray = std::vector<double>;
using Spectrum = std::vector<Complex>;

struct ScalarField {
  Grid grid;
  RealArray v;

  ScalarField() = default;
  explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), v(g.num_points(), fill) {}
  double& operator[](std::size_t p) { return v[p]; }
  double operator[](std::size_t p) const { return v[p]; }
};

struct VectorField {
  Grid grid;
  std::vector<RealArray> c;

  VectorField() = default;
  explicit VectorField(const Grid& g) : grid(g), c(g.dim(), RealArray(g.num_points(), 0.0)) {}
  int dim() const { return int(c.size()); }
  RealArray& operator[](int i) { return c[i]; }
  const RealArray& operator[](int i) const { return c[i]; }
};

// Row-major d x d entries per point.
struct MatrixField {
  Grid grid;
  int d = 0;
  std::vector<RealArray> c;

  MatrixField() = default;
  explicit MatrixField(const Grid& g) : grid(g), d(g.dim()), c(d * d, RealArray(g.num_points(), 0.0)) {}
  RealArray& at(int i, int j) { return c[i * d + j]; }
  const RealArray& at(int i, int j) const { return c[i * d + j]; }
};

struct VectorSpectrum {
  Grid grid;
  std::vector<Spectrum> c;

  VectorSpectrum() = default;
  explicit VectorSpectrum(const Grid& g) : grid(g), c(g.dim(), Spectrum(g.num_modes(), Complex{})) {}
  int dim() const { return int(c.size()); }
  Spectrum& operator[](int i) { return c[i]; }
  const Spectrum& operator[](int i) const { return c[i]; }
};

// Forward transform normalized so the coefficient of e^{ik.y} is the plain Fourier coefficient.
inline Spectrum forward(const Grid& g, const RealArray& f) {
  Spectrum out(g.num_modes());
  g.plans().forward(f.data(), out.data());
  const double s = 1.0 / double(g.num_points());
  for (auto& z : out) z *= s;
  return out;
}

inline RealArray inverse(const Grid& g, const Spectrum& f) {
  Spectrum tmp(f);
  RealArray out(g.num_points());
  g.plans().backward(tmp.data(), out.data());
  return out;
}

inline Spectrum forward(const ScalarField& f) { return forward(f.grid, f.v); }

inline VectorSpectrum forward(const VectorField& f) {
  VectorSpectrum s;
  s.grid = f.grid;
  for (const auto& comp : f.c) s.c.push_back(forward(f.grid, comp));
  return s;
}

inline ScalarField to_scalar_field(const Grid& g, const Spectrum& s) {
  ScalarField f;
  f.grid = g;
  f.v = inverse(g, s);
  return f;
}

inline VectorField inverse(const VectorSpectrum& s) {
  VectorField f;
  f.grid = s.grid;
  for (const auto& comp : s.c) f.c.push_back(inverse(s.grid, comp));
  return f;
}

inline ScalarField make_scalar(const Grid& g, const std::function<double(const Vec3&)>& fn) {
  ScalarField f(g);
  for (std::size_t p = 0; p < g.num_points(); ++p) f.v[p] = fn(g.point(p));
  return f;
}

inline VectorField make_vector(const Grid& g, const std::function<Vec3(const Vec3&)>& fn) {
  VectorField f(g);
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    const Vec3 val = fn(g.point(p));
    for (int i = 0; i < g.dim(); ++i) f.c[i][p] = val[i];
  }
  return f;
}

inline double max_abs(const RealArray& a) {
  double m = 0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

inline double max_abs(const VectorField& f) {
  double m = 0;
  for (const auto& comp : f.c) m = std::max(m, max_abs(comp));
  return m;
}

inline double max_abs_diff(const RealArray& a, const RealArray& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const VectorField& a, const VectorField& b) {
  double m = 0;
  for (int i = 0; i < a.dim(); ++i) m = std::max(m, max_abs_diff(a.c[i], b.c[i]));
  return m;
}

inline VectorField scaled(const VectorField& f, double s) {
  VectorField out = f;
  for (auto& comp : out.c)
    for (double& x : comp) x *= s;
  return out;
}

inline VectorField added(const VectorField& a, const VectorField& b, double sb = 1.0) {
  VectorField out = a;
  for (int i = 0; i < a.dim(); ++i)
    for (std::size_t p = 0; p < out.c[i].size(); ++p) out.c[i][p] += sb * b.c[i][p];
  return out;
}

}  // namespace mhdl
