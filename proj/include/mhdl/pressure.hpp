#pragma once

#include "mhdl/geometry.hpp"

namespace mhdl {

struct PressureSolution {
  VectorField grad_p;
  VectorSpectrum grad_p_hat;
  int iterations = 0;
  std::vector<double> residuals;  // residuals[0] = |rhs|, then successive-iterate differences
  double contraction_estimate = 0.0;
};

namespace press {

inline VectorSpectrum forward_dealiased(const Grid& g, const std::vector<RealArray>& comps) {
  VectorSpectrum s;
  s.grid = g;
  for (const auto& c : comps) {
    s.c.push_back(forward(g, c));
    dealias_inplace(g, s.c.back());
  }
  return s;
}

// R[ A^T rowdiv( M A ) ] with M = d1Y (x) d1Y - Yt (x) Yt, all products dealiased.
inline VectorSpectrum rhs(const Grid& g, const std::vector<RealArray>& A, const std::vector<RealArray>& d1Y,
                          const std::vector<RealArray>& Yt) {
  const int d = g.dim();
  const std::size_t np = g.num_points();
  std::vector<RealArray> W(d * d, RealArray(np));
  for (std::size_t p = 0; p < np; ++p) {
    double M[9];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) M[i * 3 + j] = d1Y[i][p] * d1Y[j][p] - Yt[i][p] * Yt[j][p];
    for (int i = 0; i < d; ++i)
      for (int m = 0; m < d; ++m) {
        double s = 0;
        for (int j = 0; j < d; ++j) s += M[i * 3 + j] * A[j * d + m][p];
        W[i * d + m][p] = s;
      }
  }
  std::vector<Spectrum> What;
  for (auto& w : W) {
    What.push_back(forward(g, w));
    dealias_inplace(g, What.back());
  }
  const VectorSpectrum V = row_divergence(g, What);
  std::vector<RealArray> Vr;
  for (const auto& c : V.c) Vr.push_back(inverse(g, c));
  std::vector<RealArray> AtV(d, RealArray(np));
  for (std::size_t p = 0; p < np; ++p)
    for (int l = 0; l < d; ++l) {
      double s = 0;
      for (int i = 0; i < d; ++i) s += A[i * d + l][p] * Vr[i][p];
      AtV[l][p] = s;
    }
  VectorSpectrum out = forward_dealiased(g, AtV);
  riesz_inplace(out);
  return out;
}

// -R[ metric g ] for a spectral g.
inline VectorSpectrum apply_operator(const Grid& g, const std::vector<RealArray>& metric, const VectorSpectrum& gh) {
  const int d = g.dim();
  const std::size_t np = g.num_points();
  std::vector<RealArray> gr;
  for (const auto& c : gh.c) gr.push_back(inverse(g, c));
  std::vector<RealArray> prod(d, RealArray(np));
  for (std::size_t p = 0; p < np; ++p)
    for (int l = 0; l < d; ++l) {
      double s = 0;
      for (int m = 0; m < d; ++m) s += metric[l * d + m][p] * gr[m][p];
      prod[l][p] = s;
    }
  VectorSpectrum out = forward_dealiased(g, prod);
  riesz_inplace(out);
  for (auto& c : out.c)
    for (auto& z : c) z = -z;
  return out;
}

inline double l2_diff(const VectorSpectrum& a, const VectorSpectrum& b) {
  double acc = 0;
  for (int i = 0; i < a.dim(); ++i) {
    Spectrum dlt(a.c[i].size());
    for (std::size_t q = 0; q < dlt.size(); ++q) dlt[q] = a.c[i][q] - b.c[i][q];
    acc += spectral_hs(a.grid, dlt, dlt, 0);
  }
  return std::sqrt(std::max(acc, 0.0));
}

// Picard iteration g <- rhs - R[metric g] from g = rhs; tolerance relative to |rhs|.
inline PressureSolution solve(const Grid& g, const std::vector<RealArray>& metric, const VectorSpectrum& rhs,
                              double tol, int max_iter) {
  if (!(tol > 0)) throw InvalidArgument("pressure tolerance must be positive");
  if (max_iter < 1) throw InvalidArgument("pressure max_iter must be at least 1");
  PressureSolution sol;
  const double rnorm = l2_norm(rhs);
  sol.residuals.push_back(rnorm);
  VectorSpectrum cur = rhs;
  if (rnorm == 0.0) {
    sol.iterations = 1;
    sol.grad_p_hat = cur;
    sol.grad_p = inverse(cur);
    return sol;
  }
  int growing = 0;
  double log_ratio_sum = 0;
  int nratio = 0;
  for (int it = 1;; ++it) {
    VectorSpectrum next = apply_operator(g, metric, cur);
    for (int i = 0; i < next.dim(); ++i)
      for (std::size_t q = 0; q < next.c[i].size(); ++q) next.c[i][q] += rhs.c[i][q];
    const double r = l2_diff(next, cur);
    if (!std::isfinite(r)) throw PressureDivergence("pressure iteration produced a non-finite residual");
    const double prev = sol.residuals.back();
    sol.residuals.push_back(r);
    cur = std::move(next);
    sol.iterations = it;
    if (r > 0 && prev > 0) {
      log_ratio_sum += std::log(r / prev);
      ++nratio;
    }
    sol.contraction_estimate = r == 0 ? 0.0 : std::exp(log_ratio_sum / std::max(nratio, 1));
    if (r <= tol * rnorm) break;
    growing = (r >= prev) ? growing + 1 : 0;
    if (growing >= 3)
      throw PressureDivergence("pressure fixed point diverging: residual ratio >= 1 for 3 consecutive iterations "
                               "(contraction estimate " + std::to_string(sol.contraction_estimate) + ")");
    if (it >= max_iter)
      throw NotConverged("pressure fixed point not converged after " + std::to_string(max_iter) +
                         " iterations, residual " + std::to_string(r));
  }
  sol.grad_p_hat = cur;
  sol.grad_p = inverse(cur);
  return sol;
}

inline std::vector<RealArray> metric_from(const CofactorData& cof) {
  const int d = cof.A.d;
  std::vector<RealArray> metric(d * d, RealArray(cof.A.grid.num_points(), 0.0));
  for (int e = 0; e < d * d; ++e)
    for (int r = 0; r < 4; ++r)
      for (std::size_t p = 0; p < metric[e].size(); ++p) metric[e][p] += cof.graded[r].c[e][p];
  return metric;
}

}  // namespace press

inline VectorField pressure_rhs(const FlowState& s, const CofactorData& cof) {
  const Grid& g = s.grid();
  std::vector<RealArray> d1Y;
  for (int i = 0; i < g.dim(); ++i) d1Y.push_back(inverse(g, differentiated(g, forward(g, s.Y.c[i]), 0)));
  return inverse(press::rhs(g, cof.A.c, d1Y, s.Yt.c));
}

inline PressureSolution solve_pressure_with_rhs(const CofactorData& cof, const VectorField& rhs, double tol = 1e-10,
                                                int max_iter = 50) {
  require_same_grid(cof.A.grid, rhs.grid, "solve_pressure_with_rhs");
  return press::solve(rhs.grid, press::metric_from(cof), forward(rhs), tol, max_iter);
}

inline PressureSolution solve_pressure_gradient(const FlowState& s, const CofactorData& cof, double tol = 1e-10,
                                                int max_iter = 50) {
  return solve_pressure_with_rhs(cof, pressure_rhs(s, cof), tol, max_iter);
}

// |grad_p + R[(A^T A - I) grad_p] - rhs|_{L2}
inline double pressure_defect(const CofactorData& cof, const VectorField& grad_p, const VectorField& rhs) {
  const Grid& g = rhs.grid;
  VectorSpectrum gp = forward(grad_p);
  VectorSpectrum r = press::apply_operator(g, press::metric_from(cof), gp);
  const VectorSpectrum rh = forward(rhs);
  for (int i = 0; i < r.dim(); ++i)
    for (std::size_t q = 0; q < r.c[i].size(); ++q) r.c[i][q] = gp.c[i][q] - r.c[i][q] - rh.c[i][q];
  return l2_norm(r);
}

// Zero-mean scalar with the given gradient.
inline ScalarField pressure_from_gradient(const VectorSpectrum& grad_p) {
  const Grid& g = grad_p.grid;
  const auto& t = g.tables();
  Spectrum p(g.num_modes(), Complex{});
  for (std::size_t q = 0; q < p.size(); ++q) {
    if (t.ksq[q] == 0.0) continue;
    Complex dot{};
    for (int i = 0; i < g.dim(); ++i) dot += t.kappa[i][q] * grad_p.c[i][q];
    p[q] = Complex(dot.imag(), -dot.real()) / t.ksq[q];
  }
  return to_scalar_field(g, p);
}

}  // namespace mhdl
