#pragma once

#include "mhdl/field.hpp"

namespace mhdl {

// Direct trigonometric-sum evaluation of band-limited fields at arbitrary points.
class Interpolant {
 public:
  Interpolant() = default;

  explicit Interpolant(const VectorField& f) : grid_(f.grid) {
    for (const auto& comp : f.c) spec_.push_back(forward(f.grid, comp));
    prepare();
  }

  explicit Interpolant(const ScalarField& f) : grid_(f.grid) {
    spec_.push_back(forward(f));
    prepare();
  }

  Interpolant(const Grid& g, std::vector<Spectrum> spec) : grid_(g), spec_(std::move(spec)) { prepare(); }

  int components() const { return int(spec_.size()); }
  const Grid& grid() const { return grid_; }

  // values[c]; gradient[c*3 + a] when requested.
  void evaluate(const Vec3& x, double* values, double* gradient = nullptr) const {
    const auto cd = grid_.spectral_dims();
    const int nc = components();
    std::array<std::vector<Complex>, 3> e;
    for (int a = 0; a < 3; ++a) {
      e[a].resize(cd[a]);
      for (int j = 0; j < cd[a]; ++j) {
        const double ph = wave_[a][j] * x[a];
        e[a][j] = Complex(std::cos(ph), std::sin(ph));
      }
    }
    if (!active_.empty()) {
      evaluate_sparse(e, values, gradient);
      return;
    }
    // acc layout per component: value, d0, d1, d2
    std::vector<Complex> acc(nc * 4, Complex{});
    std::vector<Complex> a1(nc * 4), a2(nc * 4);
    std::size_t q = 0;
    for (int j0 = 0; j0 < cd[0]; ++j0) {
      std::fill(a1.begin(), a1.end(), Complex{});
      for (int j1 = 0; j1 < cd[1]; ++j1) {
        std::fill(a2.begin(), a2.end(), Complex{});
        for (int j2 = 0; j2 < cd[2]; ++j2, ++q) {
          const Complex w = weight_[q] * e[2][j2];
          for (int c = 0; c < nc; ++c) {
            const Complex t = spec_[c][q] * w;
            a2[c * 4 + 0] += t;
            if (gradient) a2[c * 4 + 3] += t * deriv_[2][j2];
          }
        }
        for (int c = 0; c < nc; ++c) {
          a1[c * 4 + 0] += a2[c * 4 + 0] * e[1][j1];
          if (gradient) {
            a1[c * 4 + 2] += a2[c * 4 + 0] * e[1][j1] * deriv_[1][j1];
            a1[c * 4 + 3] += a2[c * 4 + 3] * e[1][j1];
          }
        }
      }
      for (int c = 0; c < nc; ++c) {
        acc[c * 4 + 0] += a1[c * 4 + 0] * e[0][j0];
        if (gradient) {
          acc[c * 4 + 1] += a1[c * 4 + 0] * e[0][j0] * deriv_[0][j0];
          acc[c * 4 + 2] += a1[c * 4 + 2] * e[0][j0];
          acc[c * 4 + 3] += a1[c * 4 + 3] * e[0][j0];
        }
      }
    }
    for (int c = 0; c < nc; ++c) {
      values[c] = acc[c * 4].real();
      if (gradient)
        for (int a = 0; a < 3; ++a) gradient[c * 3 + a] = acc[c * 4 + 1 + a].real();
    }
  }

  Vec3 value3(const Vec3& x) const {
    double v[3] = {0, 0, 0};
    evaluate(x, v);
    return {v[0], v[1], v[2]};
  }

 private:
  struct Mode {
    std::size_t q;
    int j[3];
  };

  void evaluate_sparse(const std::array<std::vector<Complex>, 3>& e, double* values, double* gradient) const {
    const int nc = components();
    for (int c = 0; c < nc; ++c) {
      values[c] = 0;
      if (gradient)
        for (int a = 0; a < 3; ++a) gradient[c * 3 + a] = 0;
    }
    for (const Mode& m : active_) {
      const Complex ph = weight_[m.q] * e[0][m.j[0]] * e[1][m.j[1]] * e[2][m.j[2]];
      for (int c = 0; c < nc; ++c) {
        const Complex t = spec_[c][m.q] * ph;
        values[c] += t.real();
        if (gradient)
          for (int a = 0; a < 3; ++a) gradient[c * 3 + a] += (t * deriv_[a][m.j[a]]).real();
      }
    }
  }

  void prepare() {
    const auto cd = grid_.spectral_dims();
    const int last = grid_.dim() - 1;
    for (int a = 0; a < 3; ++a) {
      wave_[a].assign(cd[a], 0.0);
      deriv_[a].assign(cd[a], Complex{});
      if (a >= grid_.dim()) continue;
      const int n = grid_.size(a);
      for (int j = 0; j < cd[a]; ++j) {
        int m = j;
        if (a != last && m >= n / 2) m -= n;
        wave_[a][j] = 2 * pi * m / grid_.length(a);
        deriv_[a][j] = std::abs(m) == n / 2 ? Complex{} : Complex(0.0, wave_[a][j]);
      }
    }
    weight_ = grid_.tables().weight;
    // few significant modes: sum only those; the rest is FFT roundoff
    double cmax = 0;
    for (const auto& sp : spec_)
      for (std::size_t q = 0; q < sp.size(); ++q) cmax = std::max(cmax, std::abs(sp[q]) * weight_[q]);
    const std::size_t total = weight_.size();
    std::size_t q = 0;
    for (int j0 = 0; j0 < cd[0]; ++j0)
      for (int j1 = 0; j1 < cd[1]; ++j1)
        for (int j2 = 0; j2 < cd[2]; ++j2, ++q) {
          bool keep = false;
          for (const auto& sp : spec_) keep = keep || std::abs(sp[q]) * weight_[q] > 1e-15 * cmax;
          if (!keep) continue;
          active_.push_back({q, {j0, j1, j2}});
          if (active_.size() * 8 > total) {
            active_.clear();
            return;
          }
        }
  }

  Grid grid_;
  std::vector<Spectrum> spec_;
  std::array<std::vector<double>, 3> wave_;
  std::array<std::vector<Complex>, 3> deriv_;
  std::vector<double> weight_;
  std::vector<Mode> active_;  // empty: dense evaluation
};

inline std::vector<std::vector<double>> evaluate_at_flow(const VectorField& f, const std::vector<Vec3>& points) {
  std::vector<std::vector<double>> out;
  if (points.empty()) return out;
  Interpolant it(f);
  out.reserve(points.size());
  std::vector<double> v(f.dim());
  for (const auto& x : points) {
    it.evaluate(x, v.data());
    out.push_back(v);
  }
  return out;
}

inline std::vector<double> evaluate_at_flow(const ScalarField& f, const std::vector<Vec3>& points) {
  std::vector<double> out;
  if (points.empty()) return out;
  Interpolant it(f);
  out.reserve(points.size());
  for (const auto& x : points) {
    double v = 0;
    it.evaluate(x, &v);
    out.push_back(v);
  }
  return out;
}

}  // namespace mhdl
