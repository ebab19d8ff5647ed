#pragma once

#include "mhdl/field.hpp"

namespace mhdl {

// A Fourier multiplier given by a rule on the resolved wavevector and an explicit zero-mode value.
class SpectralMultiplier {
 public:
  using Rule = std::function<Complex(const Vec3&)>;

  SpectralMultiplier(Rule rule, Complex zero_mode) : rule_(std::move(rule)), zero_(zero_mode) {}

  static SpectralMultiplier identity() {
    return SpectralMultiplier([](const Vec3&) { return Complex(1.0, 0.0); }, Complex(1.0, 0.0));
  }

  static SpectralMultiplier derivative(const std::array<int, 3>& alpha) {
    return SpectralMultiplier([alpha](const Vec3& k) { return symbol(alpha, k); },
                              alpha[0] + alpha[1] + alpha[2] == 0 ? 1.0 : 0.0);
  }

  static SpectralMultiplier laplacian() {
    return SpectralMultiplier([](const Vec3& k) { return Complex(-(k[0] * k[0] + k[1] * k[1] + k[2] * k[2])); },
                              0.0);
  }

  static SpectralMultiplier inverse_laplacian() {
    return SpectralMultiplier([](const Vec3& k) {
      const double s = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
      return s > 0 ? Complex(-1.0 / s) : Complex(0.0);
    }, 0.0);
  }

  static Complex symbol(const std::array<int, 3>& alpha, const Vec3& k) {
    double mag = 1.0;
    for (int a = 0; a < 3; ++a)
      for (int r = 0; r < alpha[a]; ++r) mag *= k[a];
    static const Complex ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return ipow[(alpha[0] + alpha[1] + alpha[2]) % 4] * mag;
  }

  // Symbols are multiplied per mode before touching data, so composition commutes exactly.
  SpectralMultiplier then(const SpectralMultiplier& o) const {
    Rule a = rule_, b = o.rule_;
    return SpectralMultiplier([a, b](const Vec3& k) { return a(k) * b(k); }, zero_ * o.zero_);
  }

  Spectrum tabulate(const Grid& g) const {
    const auto& t = g.tables();
    Spectrum m(g.num_modes());
    for (std::size_t q = 0; q < m.size(); ++q) {
      if (q == 0) {
        m[q] = zero_;
        continue;
      }
      m[q] = rule_({t.kappa[0][q], t.kappa[1][q], t.kappa[2][q]});
    }
    return m;
  }

  void apply_inplace(const Grid& g, Spectrum& s) const {
    const Spectrum m = tabulate(g);
    for (std::size_t q = 0; q < s.size(); ++q) s[q] *= m[q];
  }

  ScalarField apply(const ScalarField& f) const {
    Spectrum s = forward(f);
    apply_inplace(f.grid, s);
    return to_scalar_field(f.grid, s);
  }

 private:
  Rule rule_;
  Complex zero_;
};

inline void check_multi_index(const std::array<int, 3>& alpha, int dim) {
  for (int a = 0; a < 3; ++a)
    if (alpha[a] < 0) throw InvalidArgument("multi-index component " + std::to_string(a + 1) + " is negative");
  if (alpha[0] + alpha[1] + alpha[2] > 4) throw InvalidArgument("multi-index order exceeds 4");
  if (dim == 2 && alpha[2] != 0) throw InvalidArgument("multi-index uses axis 3 on a 2D grid");
}

inline ScalarField partial_derivative(const ScalarField& f, const std::array<int, 3>& alpha) {
  check_multi_index(alpha, f.grid.dim());
  return SpectralMultiplier::derivative(alpha).apply(f);
}

// In-place i*kappa_axis multiplication.
inline void differentiate_inplace(const Grid& g, Spectrum& s, int axis) {
  const auto& k = g.tables().kappa[axis];
  for (std::size_t q = 0; q < s.size(); ++q) s[q] = Complex(-s[q].imag() * k[q], s[q].real() * k[q]);
}

inline Spectrum differentiated(const Grid& g, const Spectrum& s, int axis) {
  Spectrum out(s);
  differentiate_inplace(g, out, axis);
  return out;
}

inline VectorSpectrum gradient(const Grid& g, const Spectrum& s) {
  VectorSpectrum out;
  out.grid = g;
  for (int a = 0; a < g.dim(); ++a) out.c.push_back(differentiated(g, s, a));
  return out;
}

inline Spectrum divergence(const VectorSpectrum& v) {
  const Grid& g = v.grid;
  Spectrum out(g.num_modes(), Complex{});
  for (int a = 0; a < g.dim(); ++a) {
    const auto& k = g.tables().kappa[a];
    for (std::size_t q = 0; q < out.size(); ++q)
      out[q] += Complex(-v.c[a][q].imag() * k[q], v.c[a][q].real() * k[q]);
  }
  return out;
}

inline void dealias_inplace(const Grid& g, Spectrum& s) {
  const auto& keep = g.tables().keep;
  for (std::size_t q = 0; q < s.size(); ++q)
    if (!keep[q]) s[q] = Complex{};
}

inline void dealias_inplace(VectorSpectrum& v) {
  for (auto& comp : v.c) dealias_inplace(v.grid, comp);
}

inline void filter_inplace(const Grid& g, Spectrum& s) {
  const auto& f = g.tables().filter;
  for (std::size_t q = 0; q < s.size(); ++q) s[q] *= f[q];
}

inline ScalarField dealias(const ScalarField& f) {
  Spectrum s = forward(f);
  dealias_inplace(f.grid, s);
  return to_scalar_field(f.grid, s);
}

inline VectorField dealias(const VectorField& f) {
  VectorSpectrum s = forward(f);
  dealias_inplace(s);
  return inverse(s);
}

// v -> k (k . v) / |k|^2, zero mode sent to 0. Identity on gradients, zero on solenoidal fields.
inline void riesz_inplace(VectorSpectrum& v) {
  const Grid& g = v.grid;
  const auto& t = g.tables();
  const int d = g.dim();
  for (std::size_t q = 0; q < g.num_modes(); ++q) {
    if (t.ksq[q] == 0.0) {
      for (int i = 0; i < d; ++i) v.c[i][q] = Complex{};
      continue;
    }
    Complex dot{};
    for (int i = 0; i < d; ++i) dot += t.kappa[i][q] * v.c[i][q];
    dot /= t.ksq[q];
    for (int i = 0; i < d; ++i) v.c[i][q] = t.kappa[i][q] * dot;
  }
}

inline void leray_inplace(VectorSpectrum& v) {
  const Grid& g = v.grid;
  const auto& t = g.tables();
  const int d = g.dim();
  for (std::size_t q = 0; q < g.num_modes(); ++q) {
    if (t.ksq[q] == 0.0) continue;
    Complex dot{};
    for (int i = 0; i < d; ++i) dot += t.kappa[i][q] * v.c[i][q];
    dot /= t.ksq[q];
    for (int i = 0; i < d; ++i) v.c[i][q] -= t.kappa[i][q] * dot;
  }
}

inline VectorField riesz_projector(const VectorField& v) {
  VectorSpectrum s = forward(v);
  riesz_inplace(s);
  return inverse(s);
}

inline VectorField leray_project(const VectorField& v) {
  VectorSpectrum s = forward(v);
  leray_inplace(s);
  return inverse(s);
}

// Row divergence of a matrix spectrum: (div T)_i = sum_m d_m T_im.
inline VectorSpectrum row_divergence(const Grid& g, const std::vector<Spectrum>& T) {
  const int d = g.dim();
  VectorSpectrum out(g);
  for (int i = 0; i < d; ++i)
    for (int m = 0; m < d; ++m) {
      const auto& k = g.tables().kappa[m];
      const Spectrum& s = T[i * d + m];
      for (std::size_t q = 0; q < s.size(); ++q) out.c[i][q] += Complex(-s[q].imag() * k[q], s[q].real() * k[q]);
    }
  return out;
}

// Riesz operator applied to the row divergence of T.
inline VectorField riesz_projector(const MatrixField& T) {
  std::vector<Spectrum> s;
  for (const auto& comp : T.c) s.push_back(forward(T.grid, comp));
  VectorSpectrum v = row_divergence(T.grid, s);
  riesz_inplace(v);
  return inverse(v);
}

// Complete homogeneous sums: w_s(k) = sum_{|alpha|<=s} prod_a k_a^{2 alpha_a}.
inline double hs_weight(const Vec3& k, int dim, int s) {
  double h[8] = {1, 0, 0, 0, 0, 0, 0, 0};
  for (int a = 0; a < dim; ++a) {
    const double x = k[a] * k[a];
    for (int j = 1; j <= s; ++j) h[j] += x * h[j - 1];
  }
  double w = 0;
  for (int j = 0; j <= s; ++j) w += h[j];
  return w;
}

inline std::vector<double> hs_weights(const Grid& g, int s) {
  const auto& t = g.tables();
  std::vector<double> w(g.num_modes());
  for (std::size_t q = 0; q < w.size(); ++q)
    w[q] = hs_weight({t.kappa[0][q], t.kappa[1][q], t.kappa[2][q]}, g.dim(), s);
  return w;
}

// V * sum_q mult_q * w_s(q) * sym(q) * Re(a conj b), Parseval over the half spectrum.
template <class Symbol>
double spectral_pairing(const Grid& g, const Spectrum& a, const Spectrum& b, int s, Symbol sym) {
  const auto& t = g.tables();
  double acc = 0;
  for (std::size_t q = 0; q < a.size(); ++q) {
    const double re = a[q].real() * b[q].real() + a[q].imag() * b[q].imag();
    if (re == 0.0) continue;
    const Vec3 k{t.kappa[0][q], t.kappa[1][q], t.kappa[2][q]};
    acc += t.weight[q] * hs_weight(k, g.dim(), s) * sym(k) * re;
  }
  return g.volume() * acc;
}

inline double spectral_hs(const Grid& g, const Spectrum& a, const Spectrum& b, int s) {
  return spectral_pairing(g, a, b, s, [](const Vec3&) { return 1.0; });
}

inline void check_sobolev_index(int s) {
  if (s < 0 || s > 4) throw InvalidArgument("Sobolev index must be in 0..4");
}

inline double hs_inner_product(const ScalarField& f, const ScalarField& g, int s) {
  require_same_grid(f.grid, g.grid, "hs_inner_product");
  check_sobolev_index(s);
  return spectral_hs(f.grid, forward(f), forward(g), s);
}

inline double hs_inner_product(const VectorField& f, const VectorField& g, int s) {
  require_same_grid(f.grid, g.grid, "hs_inner_product");
  check_sobolev_index(s);
  double acc = 0;
  for (int i = 0; i < f.dim(); ++i) acc += spectral_hs(f.grid, forward(f.grid, f.c[i]), forward(g.grid, g.c[i]), s);
  return acc;
}

inline double l2_norm(const VectorField& f) { return std::sqrt(hs_inner_product(f, f, 0)); }

inline double l2_norm(const VectorSpectrum& f) {
  double acc = 0;
  for (const auto& comp : f.c) acc += spectral_hs(f.grid, comp, comp, 0);
  return std::sqrt(std::max(acc, 0.0));
}

}  // namespace mhdl
