#pragma once

#include "mhdl/interpolate.hpp"
#include "mhdl/spectral_ops.hpp"

namespace mhdl {

// X = y + Y, Yt = velocity along trajectories.
struct FlowState {
  VectorField Y;
  VectorField Yt;
  double t = 0.0;

  static FlowState zero(const Grid& g) { return {VectorField(g), VectorField(g), 0.0}; }
  const Grid& grid() const { return Y.grid; }
};

struct CofactorData {
  MatrixField A;
  MatrixField B1;
  MatrixField B2;
  std::array<MatrixField, 4> graded;  // homogeneous pieces of A^T A - I, degrees 1..4
};

namespace geom {

// G_ij = d_j Y^i, embedded in a 3x3 matrix with unused entries zero.
inline Mat3 load_gradient(const std::vector<RealArray>& G, int d, std::size_t p) {
  Mat3 m{};
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m[i * 3 + j] = G[i * d + j][p];
  return m;
}

inline void cofactor_parts(const Mat3& G, int d, Mat3& B1, Mat3& B2) {
  double tr = 0;
  for (int i = 0; i < d; ++i) tr += G[i * 3 + i];
  B1 = Mat3{};
  B2 = Mat3{};
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) B1[i * 3 + j] = (i == j ? tr : 0.0) - G[j * 3 + i];
  if (d == 3) B2 = cofactor3(G);
}

inline Mat3 tmul(const Mat3& a, const Mat3& b) { return matmul3(transpose3(a), b); }

inline void graded_parts(const Mat3& B1, const Mat3& B2, Mat3 out[4]) {
  const Mat3 B1t = transpose3(B1), B2t = transpose3(B2);
  const Mat3 b11 = tmul(B1, B1), b12 = tmul(B1, B2), b21 = tmul(B2, B1), b22 = tmul(B2, B2);
  for (int e = 0; e < 9; ++e) {
    out[0][e] = B1[e] + B1t[e];
    out[1][e] = B2[e] + B2t[e] + b11[e];
    out[2][e] = b12[e] + b21[e];
    out[3][e] = b22[e];
  }
}

inline double det_identity_plus(const Mat3& G, int d) {
  if (d == 2) return (1 + G[0]) * (1 + G[4]) - G[1] * G[3];
  Mat3 F = G;
  F[0] += 1;
  F[4] += 1;
  F[8] += 1;
  return det3(F);
}

// Spectral gradient matrix of a vector spectrum, returned in physical space.
inline std::vector<RealArray> gradient_matrix(const VectorSpectrum& Y) {
  const Grid& g = Y.grid;
  const int d = g.dim();
  std::vector<RealArray> G(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) G[i * d + j] = inverse(g, differentiated(g, Y.c[i], j));
  return G;
}

// Pointwise geometric data used by the force and pressure kernels.
struct Pointwise {
  int d = 0;
  std::vector<RealArray> gradY;   // d*d
  std::vector<RealArray> A;       // d*d
  std::vector<RealArray> metric;  // A^T A - I
  std::array<std::vector<RealArray>, 4> graded;
  bool has_graded = false;
};

inline Pointwise pointwise(const VectorSpectrum& Yhat, bool with_graded) {
  const Grid& g = Yhat.grid;
  const int d = g.dim();
  const std::size_t np = g.num_points();
  Pointwise pw;
  pw.d = d;
  pw.gradY = gradient_matrix(Yhat);
  pw.A.assign(d * d, RealArray(np));
  pw.metric.assign(d * d, RealArray(np));
  pw.has_graded = with_graded;
  if (with_graded)
    for (auto& gd : pw.graded) gd.assign(d * d, RealArray(np));
  Mat3 B1, B2, Gd[4];
  for (std::size_t p = 0; p < np; ++p) {
    const Mat3 G = load_gradient(pw.gradY, d, p);
    cofactor_parts(G, d, B1, B2);
    Mat3 A{};
    for (int e = 0; e < 9; ++e) A[e] = B1[e] + B2[e];
    for (int i = 0; i < d; ++i) A[i * 3 + i] += 1.0;
    const Mat3 AtA = tmul(A, A);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        pw.A[i * d + j][p] = A[i * 3 + j];
        pw.metric[i * d + j][p] = AtA[i * 3 + j] - (i == j ? 1.0 : 0.0);
      }
    if (with_graded) {
      graded_parts(B1, B2, Gd);
      for (int r = 0; r < 4; ++r)
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) pw.graded[r][i * d + j][p] = Gd[r][i * 3 + j];
    }
  }
  return pw;
}

}  // namespace geom

inline CofactorData cofactor_matrices(const VectorField& Y) {
  const Grid& g = Y.grid;
  const int d = g.dim();
  const std::size_t np = g.num_points();
  const auto G = geom::gradient_matrix(forward(Y));
  CofactorData cd;
  cd.A = MatrixField(g);
  cd.B1 = MatrixField(g);
  cd.B2 = MatrixField(g);
  for (auto& m : cd.graded) m = MatrixField(g);
  Mat3 B1, B2, Gd[4];
  for (std::size_t p = 0; p < np; ++p) {
    geom::cofactor_parts(geom::load_gradient(G, d, p), d, B1, B2);
    geom::graded_parts(B1, B2, Gd);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const int e = i * 3 + j;
        cd.B1.at(i, j)[p] = B1[e];
        cd.B2.at(i, j)[p] = B2[e];
        cd.A.at(i, j)[p] = (i == j ? 1.0 : 0.0) + B1[e] + B2[e];
        for (int r = 0; r < 4; ++r) cd.graded[r].at(i, j)[p] = Gd[r][e];
      }
  }
  return cd;
}

inline ScalarField jacobian_determinant(const VectorField& Y) {
  const Grid& g = Y.grid;
  const int d = g.dim();
  const auto G = geom::gradient_matrix(forward(Y));
  ScalarField det(g);
  for (std::size_t p = 0; p < g.num_points(); ++p) det.v[p] = geom::det_identity_plus(geom::load_gradient(G, d, p), d);
  return det;
}

inline double det_drift(const VectorField& Y) {
  const ScalarField det = jacobian_determinant(Y);
  double m = 0;
  for (double x : det.v) m = std::max(m, std::abs(x - 1.0));
  return m;
}

inline std::array<MatrixField, 4> metric_graded(const VectorField& Y) { return cofactor_matrices(Y).graded; }

// Eulerian quantities carried along trajectories: b(X) = e1 + d_1 Y, u(X) = Yt.
struct TrajectorySamples {
  VectorField X;
  VectorField u;
  VectorField b;
};

inline TrajectorySamples pushforward_fields(const FlowState& s) {
  const Grid& g = s.grid();
  TrajectorySamples out;
  out.X = VectorField(g);
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    const Vec3 y = g.point(p);
    for (int i = 0; i < g.dim(); ++i) out.X.c[i][p] = y[i] + s.Y.c[i][p];
  }
  out.u = s.Yt;
  out.b = VectorField(g);
  for (int i = 0; i < g.dim(); ++i) {
    out.b.c[i] = inverse(g, differentiated(g, forward(g, s.Y.c[i]), 0));
    if (i == 0)
      for (double& x : out.b.c[0]) x += 1.0;
  }
  return out;
}

}  // namespace mhdl
