#pragma once

#include "mhdl/pressure.hpp"

namespace mhdl {

// All force fields are held as dealiased spectra.
struct NonlinearForce {
  VectorSpectrum f_exact;
  std::array<VectorSpectrum, 4> f_visc_graded;  // div(G_d grad Yt), d = 1..4
  VectorSpectrum f_pressure;                    // -A grad p
  VectorSpectrum f1, f2, f3;
  bool has_decomposition = false;
  int pressure_iterations = 0;
  double contraction_estimate = 0.0;
  std::vector<double> pressure_residuals;
  double grad_u_linf = 0.0;  // max over the grid of |grad Yt A^T|
  VectorSpectrum grad_p_hat;

  VectorField exact() const { return inverse(f_exact); }
};

struct ForceOptions {
  double pressure_tol = 1e-10;
  int pressure_max_iter = 50;
  bool decomposition = false;
};

namespace forcek {

// f^i = sum_l d_l ( sum_m G_lm d_m Yt^i )
inline VectorSpectrum viscous(const Grid& g, const std::vector<RealArray>& G, const std::vector<RealArray>& V) {
  const int d = g.dim();
  const std::size_t np = g.num_points();
  std::vector<Spectrum> T(d * d);
  RealArray buf(np);
  for (int i = 0; i < d; ++i)
    for (int l = 0; l < d; ++l) {
      for (std::size_t p = 0; p < np; ++p) {
        double s = 0;
        for (int m = 0; m < d; ++m) s += G[l * d + m][p] * V[i * d + m][p];
        buf[p] = s;
      }
      T[i * d + l] = forward(g, buf);
      dealias_inplace(g, T[i * d + l]);
    }
  return row_divergence(g, T);
}

inline void add_to(VectorSpectrum& a, const VectorSpectrum& b, double s = 1.0) {
  for (int i = 0; i < a.dim(); ++i)
    for (std::size_t q = 0; q < a.c[i].size(); ++q) a.c[i][q] += s * b.c[i][q];
}

}  // namespace forcek

inline NonlinearForce compute_force_spectral(const VectorSpectrum& Yh, const VectorSpectrum& Yth,
                                             const ForceOptions& opt = {}) {
  const Grid& g = Yh.grid;
  const int d = g.dim();
  const std::size_t np = g.num_points();
  NonlinearForce out;

  const geom::Pointwise pw = geom::pointwise(Yh, opt.decomposition);
  const std::vector<RealArray> V = geom::gradient_matrix(Yth);
  std::vector<RealArray> Yt, d1Y;
  for (int i = 0; i < d; ++i) {
    Yt.push_back(inverse(g, Yth.c[i]));
    d1Y.push_back(pw.gradY[i * d + 0]);
  }

  for (std::size_t p = 0; p < np; ++p) {
    double s = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double e = 0;
        for (int k = 0; k < d; ++k) e += V[i * d + k][p] * pw.A[j * d + k][p];
        s += e * e;
      }
    out.grad_u_linf = std::max(out.grad_u_linf, std::sqrt(s));
  }

  out.f_exact = forcek::viscous(g, pw.metric, V);

  const VectorSpectrum rhs = press::rhs(g, pw.A, d1Y, Yt);
  PressureSolution ps = press::solve(g, pw.metric, rhs, opt.pressure_tol, opt.pressure_max_iter);
  out.pressure_iterations = ps.iterations;
  out.contraction_estimate = ps.contraction_estimate;
  out.pressure_residuals = ps.residuals;
  std::vector<RealArray> Agp(d, RealArray(np));
  for (std::size_t p = 0; p < np; ++p)
    for (int i = 0; i < d; ++i) {
      double s = 0;
      for (int m = 0; m < d; ++m) s += pw.A[i * d + m][p] * ps.grad_p.c[m][p];
      Agp[i][p] = -s;
    }
  out.f_pressure = press::forward_dealiased(g, Agp);
  out.grad_p_hat = std::move(ps.grad_p_hat);
  forcek::add_to(out.f_exact, out.f_pressure);

  if (opt.decomposition) {
    out.has_decomposition = true;
    for (int r = 0; r < 4; ++r) out.f_visc_graded[r] = forcek::viscous(g, pw.graded[r], V);
    // f1 = (d_l G1_lm) d_m Yt, f2 = G1_lm d_l d_m Yt
    const auto& G1 = pw.graded[0];
    std::vector<RealArray> divG1(d, RealArray(np, 0.0));
    for (int l = 0; l < d; ++l)
      for (int m = 0; m < d; ++m) {
        const RealArray dl = inverse(g, differentiated(g, forward(g, G1[l * d + m]), l));
        for (std::size_t p = 0; p < np; ++p) divG1[m][p] += dl[p];
      }
    std::vector<RealArray> f1(d, RealArray(np, 0.0)), f2(d, RealArray(np, 0.0));
    for (int i = 0; i < d; ++i) {
      for (int m = 0; m < d; ++m)
        for (std::size_t p = 0; p < np; ++p) f1[i][p] += divG1[m][p] * V[i * d + m][p];
      for (int l = 0; l < d; ++l)
        for (int m = l; m < d; ++m) {
          const RealArray dlm = inverse(g, differentiated(g, differentiated(g, Yth.c[i], l), m));
          const double mult = l == m ? 1.0 : 2.0;
          for (std::size_t p = 0; p < np; ++p) f2[i][p] += mult * G1[l * d + m][p] * dlm[p];
        }
    }
    out.f1 = press::forward_dealiased(g, f1);
    out.f2 = press::forward_dealiased(g, f2);
    out.f3 = out.f_visc_graded[1];
    forcek::add_to(out.f3, out.f_visc_graded[2]);
    forcek::add_to(out.f3, out.f_visc_graded[3]);
  }
  return out;
}

inline NonlinearForce compute_force(const FlowState& s, const ForceOptions& opt = {}) {
  return compute_force_spectral(forward(s.Y), forward(s.Yt), opt);
}

}  // namespace mhdl
