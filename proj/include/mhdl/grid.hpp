#pragma once

#include <fftw3.h>

#include <memory>
#include <mutex>
#include <string>

#include "mhdl/core.hpp"

namespace mhdl {

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

// Per-mode tables for the half-spectrum produced by a real-to-complex transform.
// A mode sitting on the Nyquist index of some axis gets a zero resolved wavenumber
// on that axis, so odd derivatives annihilate it.
struct SpectralTables {
  std::array<std::vector<int>, 3> mode;
  std::array<std::vector<double>, 3> kappa;
  std::vector<double> ksq;
  std::vector<double> weight;  // multiplicity of the mode in the full spectrum
  std::vector<unsigned char> keep;
  std::vector<double> filter;
};

class FftPlans {
 public:
  FftPlans(int dim, const std::array<int, 3>& n) {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    int dims[3] = {n[0], n[1], n[2]};
    std::size_t nreal = std::size_t(n[0]) * n[1] * n[2];
    std::size_t ncplx = dim == 3 ? std::size_t(n[0]) * n[1] * (n[2] / 2 + 1)
                                 : std::size_t(n[0]) * (n[1] / 2 + 1);
    double* r = fftw_alloc_real(nreal);
    fftw_complex* c = fftw_alloc_complex(ncplx);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fwd_ = fftw_plan_dft_r2c(dim, dims, r, c, flags);
    bwd_ = fftw_plan_dft_c2r(dim, dims, c, r, flags);
    fftw_free(r);
    fftw_free(c);
    if (!fwd_ || !bwd_) throw Error("FFTW planning failed");
  }
  ~FftPlans() {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

  void forward(const double* in, Complex* out) const {
    fftw_execute_dft_r2c(fwd_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  }
  // Destroys `in`.
  void backward(Complex* in, double* out) const {
    fftw_execute_dft_c2r(bwd_, reinterpret_cast<fftw_complex*>(in), out);
  }

 private:
  fftw_plan fwd_{};
  fftw_plan bwd_{};
};

class Grid {
 public:
  Grid() = default;

  Grid(int dimension, std::array<int, 3> sizes, std::array<double, 3> lengths) {
    if (dimension != 2 && dimension != 3)
      throw InvalidArgument("grid dimension must be 2 or 3");
    auto impl = std::make_shared<Impl>();
    impl->dim = dimension;
    for (int a = 0; a < 3; ++a) {
      if (a >= dimension) {
        impl->n[a] = 1;
        impl->len[a] = 1.0;
        continue;
      }
      const int na = sizes[a];
      if (na < 4 || (na & (na - 1)) != 0)
        throw InvalidArgument("grid size on axis " + std::to_string(a + 1) +
                              " must be a power of two >= 4");
      if (!(lengths[a] > 0) || !std::isfinite(lengths[a]))
        throw InvalidArgument("box length on axis " + std::to_string(a + 1) + " must be positive");
      impl->n[a] = na;
      impl->len[a] = lengths[a];
    }
    if (dimension == 3) {
      impl->c = {impl->n[0], impl->n[1], impl->n[2] / 2 + 1};
    } else {
      impl->c = {impl->n[0], impl->n[1] / 2 + 1, 1};
    }
    build_tables(*impl);
    impl_ = std::move(impl);
  }

  static Grid cube(int dimension, int n, double length = 2 * pi) {
    return Grid(dimension, {n, n, n}, {length, length, length});
  }

  bool valid() const { return static_cast<bool>(impl_); }
  int dim() const { return impl_->dim; }
  int size(int axis) const { return impl_->n[axis]; }
  double length(int axis) const { return impl_->len[axis]; }
  double spacing(int axis) const { return impl_->len[axis] / impl_->n[axis]; }
  std::array<int, 3> sizes() const { return impl_->n; }
  std::array<double, 3> lengths() const { return impl_->len; }
  std::array<int, 3> spectral_dims() const { return impl_->c; }
  std::size_t num_points() const { return std::size_t(impl_->n[0]) * impl_->n[1] * impl_->n[2]; }
  std::size_t num_modes() const { return std::size_t(impl_->c[0]) * impl_->c[1] * impl_->c[2]; }
  double volume() const {
    double v = 1;
    for (int a = 0; a < dim(); ++a) v *= impl_->len[a];
    return v;
  }
  double cell_volume() const { return volume() / double(num_points()); }
  double min_spacing() const {
    double h = spacing(0);
    for (int a = 1; a < dim(); ++a) h = std::min(h, spacing(a));
    return h;
  }
  // Largest retained integer index under the 2/3 rule.
  int dealias_cutoff(int axis) const { return (impl_->n[axis] - 1) / 3; }

  Vec3 point(std::size_t p) const {
    const std::size_t i2 = p % impl_->n[2];
    const std::size_t i1 = (p / impl_->n[2]) % impl_->n[1];
    const std::size_t i0 = p / (std::size_t(impl_->n[2]) * impl_->n[1]);
    Vec3 y{i0 * spacing(0), i1 * spacing(1), dim() == 3 ? i2 * spacing(2) : 0.0};
    return y;
  }

  const SpectralTables& tables() const { return impl_->tables; }

  const FftPlans& plans() const {
    std::call_once(impl_->plan_once, [this] { impl_->plans = std::make_unique<FftPlans>(dim(), impl_->n); });
    return *impl_->plans;
  }

  bool operator==(const Grid& o) const {
    if (impl_ == o.impl_) return true;
    if (!impl_ || !o.impl_) return false;
    return impl_->dim == o.impl_->dim && impl_->n == o.impl_->n && impl_->len == o.impl_->len;
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }

 private:
  struct Impl {
    int dim = 3;
    std::array<int, 3> n{1, 1, 1};
    std::array<int, 3> c{1, 1, 1};
    std::array<double, 3> len{1, 1, 1};
    SpectralTables tables;
    mutable std::once_flag plan_once;
    mutable std::unique_ptr<FftPlans> plans;
  };

  static void build_tables(Impl& g) {
    const std::size_t nm = std::size_t(g.c[0]) * g.c[1] * g.c[2];
    SpectralTables& t = g.tables;
    for (int a = 0; a < 3; ++a) {
      t.mode[a].assign(nm, 0);
      t.kappa[a].assign(nm, 0.0);
    }
    t.ksq.assign(nm, 0.0);
    t.weight.assign(nm, 1.0);
    t.keep.assign(nm, 1);
    t.filter.assign(nm, 1.0);
    const int last = g.dim - 1;
    std::size_t q = 0;
    for (int j0 = 0; j0 < g.c[0]; ++j0)
      for (int j1 = 0; j1 < g.c[1]; ++j1)
        for (int j2 = 0; j2 < g.c[2]; ++j2, ++q) {
          const int j[3] = {j0, j1, j2};
          double eta = 0;
          for (int a = 0; a < g.dim; ++a) {
            const int na = g.n[a];
            int m = j[a];
            if (a != last && m >= na / 2) m -= na;
            const bool nyq = std::abs(m) == na / 2;
            t.mode[a][q] = m;
            t.kappa[a][q] = nyq ? 0.0 : 2 * pi * m / g.len[a];
            t.ksq[q] += t.kappa[a][q] * t.kappa[a][q];
            const int cut = (na - 1) / 3;
            if (std::abs(m) > cut) t.keep[q] = 0;
            eta = std::max(eta, std::abs(m) / (0.5 * na));
          }
          const int jl = j[last];
          t.weight[q] = (jl == 0 || jl == g.n[last] / 2) ? 1.0 : 2.0;
          t.filter[q] = eta > 2.0 / 3.0 ? std::exp(-36.0 * std::pow(eta, 36)) : 1.0;
        }
  }

  std::shared_ptr<Impl> impl_;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (a != b) throw InvalidArgument(std::string("grid mismatch in ") + what);
}

}  // namespace mhdl
