#pragma once

#include <limits>

#include "mhdl/geometry.hpp"
#include "mhdl/interpolate.hpp"

namespace mhdl {

struct InitialMap {
  VectorField X0;  // map values, not displacement
  MatrixField A0;  // (grad X0)^{-T}
  double residual_e1 = 0;
  double residual_det = 0;
  double plane_residual = 0;  // max |J_eta b0^1(0, eta) - 1|
  int iterations = 0;
};

struct InitialMapOptions {
  int max_iter = 60;
  int substeps = 8;  // RK4 steps per grid spacing along y1
  double div_tol = 1e-10;
  int plane_refine = 2;  // transverse oversampling for the plane equation
};

namespace imap {

// Periodic transverse plane as a 2D grid; a 2D problem gets a dummy constant second axis.
inline Grid plane_grid(const Grid& g, int refine = 1) {
  if (g.dim() == 3) return Grid(2, {refine * g.size(1), refine * g.size(2), 1}, {g.length(1), g.length(2), 1.0});
  return Grid(2, {refine * g.size(1), 4, 1}, {g.length(1), 2 * pi, 1.0});
}

inline double centered_y1(const Grid& g, int i) {
  const int n = g.size(0);
  return (i < n / 2 ? i : i - n) * g.spacing(0);
}

}  // namespace imap

inline InitialMap construct_initial_map(const VectorField& b0, double tol, const InitialMapOptions& opt = {}) {
  const Grid& g = b0.grid;
  const int d = g.dim();
  if (!(tol > 0)) throw InvalidArgument("construction tolerance must be positive");

  const VectorSpectrum bh = forward(b0);
  {
    const Spectrum div = divergence(bh);
    double dmax = 0;
    for (const auto& z : div) dmax = std::max(dmax, std::abs(z));
    if (dmax > opt.div_tol * std::max(1.0, max_abs(b0)))
      throw InvalidArgument("b0 is not divergence-free (max spectral divergence " + std::to_string(dmax) + ")");
  }
  double bmin = std::numeric_limits<double>::infinity();
  for (double x : b0.c[0]) bmin = std::min(bmin, x);
  if (bmin < 0.5)
    throw ConstructionFailed("b0 is not transversal to the plane: min b0^1 = " + std::to_string(bmin) + " < 1/2");

  const Interpolant B(g, bh.c);
  if (opt.plane_refine < 1) throw InvalidArgument("plane_refine must be at least 1");
  const int rf = opt.plane_refine;
  const Grid pg = imap::plane_grid(g, rf);
  const std::size_t npl = pg.num_points();
  const int ptr = d - 1;  // transverse directions actually used

  // Plane map eta = y' + grad' psi with det(I + grad'^2 psi) b0^1(0, eta) = 1.
  Spectrum psi(pg.num_modes(), Complex{});
  RealArray J(npl, 1.0), b1(npl, 1.0);
  std::vector<RealArray> eta(2, RealArray(npl)), hess(4, RealArray(npl, 0.0));
  InitialMap out;
  auto update = [&]() {
    for (int a = 0; a < 2; ++a) {
      const RealArray ga = inverse(pg, differentiated(pg, psi, a));
      for (std::size_t r = 0; r < npl; ++r) eta[a][r] = pg.point(r)[a] + ga[r];
      for (int c = 0; c < 2; ++c)
        hess[a * 2 + c] = inverse(pg, differentiated(pg, differentiated(pg, psi, a), c));
    }
    double res = 0;
    for (std::size_t r = 0; r < npl; ++r) {
      const Vec3 x = d == 3 ? Vec3{0.0, eta[0][r], eta[1][r]} : Vec3{0.0, eta[0][r], 0.0};
      double v[3];
      B.evaluate(x, v);
      b1[r] = v[0];
      J[r] = (1 + hess[0][r]) * (1 + hess[3][r]) - hess[1][r] * hess[2][r];
      res = std::max(res, std::abs(J[r] * b1[r] - 1));
    }
    return res;
  };
  double res = update();
  int it = 0;
  while (res > 0.1 * tol) {
    if (it >= opt.max_iter)
      throw NotConverged("plane reparametrization not converged after " + std::to_string(opt.max_iter) +
                         " iterations, residual " + std::to_string(res));
    RealArray rhs(npl);
    for (std::size_t r = 0; r < npl; ++r)
      rhs[r] = 1.0 / b1[r] - 1.0 - (hess[0][r] * hess[3][r] - hess[1][r] * hess[2][r]);
    Spectrum rh = forward(pg, rhs);
    const auto& t = pg.tables();
    for (std::size_t q = 0; q < rh.size(); ++q) psi[q] = t.ksq[q] > 0 ? -rh[q] / t.ksq[q] : Complex{};
    const double next = update();
    ++it;
    if (!(next < 2 * res) && it > 3)
      throw NotConverged("plane reparametrization diverging, residual " + std::to_string(next));
    res = next;
  }
  out.iterations = it;
  out.plane_residual = res;

  // Flow from the plane along b0, with variational equations for the transverse columns.
  out.X0 = VectorField(g);
  out.A0 = MatrixField(g);
  const int n0 = g.size(0);
  const std::size_t ntr = g.num_points() / n0;
  const double hs = g.spacing(0) / opt.substeps;
  std::vector<std::vector<double>> sample_w(ptr);
  auto rhs = [&](const Vec3& z, const Vec3 W[2], Vec3& dz, Vec3 dW[2]) {
    double v[3], gr[9];
    B.evaluate(z, v, gr);
    dz = {v[0], v[1], d == 3 ? v[2] : 0.0};
    for (int j = 0; j < ptr; ++j)
      for (int i = 0; i < 3; ++i) {
        double s = 0;
        for (int a = 0; a < 3; ++a) s += gr[i * 3 + a] * W[j][a];
        dW[j][i] = i < d ? s : 0.0;
      }
  };
  double res_e1 = 0, res_det = 0;
  for (std::size_t r = 0; r < ntr; ++r) {
    // coarse transverse index r -> refined plane index; in 2D the dummy axis index is 0
    const std::size_t pr = d == 3 ? (r / g.size(2)) * rf * pg.size(1) + (r % g.size(2)) * rf : r * rf * 4;
    const Vec3 start = d == 3 ? Vec3{0.0, eta[0][pr], eta[1][pr]} : Vec3{0.0, eta[0][pr], 0.0};
    Vec3 W0[2];
    for (int j = 0; j < ptr; ++j) {
      W0[j] = {0.0, (j == 0 ? 1.0 : 0.0) + hess[0 * 2 + j][pr], d == 3 ? (j == 1 ? 1.0 : 0.0) + hess[1 * 2 + j][pr] : 0.0};
    }
    for (int dir : {1, -1}) {
      Vec3 z = start;
      Vec3 W[2] = {W0[0], W0[1]};
      const int steps_to = dir > 0 ? n0 / 2 - 1 : n0 / 2;
      for (int m = 0; m <= steps_to; ++m) {
        if (m > 0) {
          for (int s = 0; s < opt.substeps; ++s) {
            const double h = dir * hs;
            Vec3 kz[4], kW[4][2];
            Vec3 zs = z, Ws[2] = {W[0], W[1]};
            for (int st = 0; st < 4; ++st) {
              if (st > 0) {
                const double c = st == 3 ? h : 0.5 * h;
                for (int a = 0; a < 3; ++a) zs[a] = z[a] + c * kz[st - 1][a];
                for (int j = 0; j < ptr; ++j)
                  for (int a = 0; a < 3; ++a) Ws[j][a] = W[j][a] + c * kW[st - 1][j][a];
              }
              rhs(zs, Ws, kz[st], kW[st]);
            }
            for (int a = 0; a < 3; ++a) z[a] += h / 6 * (kz[0][a] + 2 * kz[1][a] + 2 * kz[2][a] + kz[3][a]);
            for (int j = 0; j < ptr; ++j)
              for (int a = 0; a < 3; ++a)
                W[j][a] += h / 6 * (kW[0][j][a] + 2 * kW[1][j][a] + 2 * kW[2][j][a] + kW[3][j][a]);
          }
        } else if (dir < 0) {
          continue;  // y1 = 0 already written by the forward pass
        }
        const int i0 = dir > 0 ? m : (n0 - m) % n0;
        const std::size_t p = std::size_t(i0) * ntr + r;
        double v[3];
        B.evaluate(z, v);
        Mat3 F{};
        for (int i = 0; i < 3; ++i) F[i * 3 + 0] = i < d ? v[i] : 0.0;
        for (int j = 0; j < ptr; ++j)
          for (int i = 0; i < 3; ++i) F[i * 3 + 1 + j] = W[j][i];
        if (d == 2) F[8] = 1.0;
        const double det = det3(F);
        const Mat3 Fi = inverse3(F);
        for (int i = 0; i < d; ++i) {
          out.X0.c[i][p] = z[i];
          for (int j = 0; j < d; ++j) out.A0.at(i, j)[p] = Fi[j * 3 + i];
        }
        // A0^T b0(X0) - e1 = F^{-1} b0(X0) - e1
        for (int i = 0; i < d; ++i) {
          double s = 0;
          for (int a = 0; a < d; ++a) s += Fi[i * 3 + a] * v[a];
          res_e1 = std::max(res_e1, std::abs(s - (i == 0 ? 1.0 : 0.0)));
        }
        res_det = std::max(res_det, std::abs(det - 1));
      }
    }
  }
  out.residual_e1 = res_e1;
  out.residual_det = res_det;
  if (res_e1 > tol || res_det > tol)
    throw NotConverged("initial map residuals above tolerance: e1 " + std::to_string(res_e1) + ", det " +
                       std::to_string(res_det));
  return out;
}

}  // namespace mhdl
