#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace mhdl;
using namespace testing;

namespace {

// brute-force cofactor matrix by 2x2 minors
Mat3 cofactor_oracle(const Mat3& m) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double minor[4];
      int q = 0;
      for (int r = 0; r < 3; ++r)
        for (int s = 0; s < 3; ++s)
          if (r != i && s != j) minor[q++] = m[r * 3 + s];
      c[i * 3 + j] = ((i + j) % 2 ? -1.0 : 1.0) * (minor[0] * minor[3] - minor[1] * minor[2]);
    }
  return c;
}

Mat3 gradient_at(const std::vector<RealArray>& G, int d, std::size_t p) {
  Mat3 m{};
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m[i * 3 + j] = G[i * d + j][p];
  return m;
}

std::vector<RealArray> spectral_gradient(const VectorField& Y) {
  return geom::gradient_matrix(forward(Y));
}

double max_entry_diff(const MatrixField& a, const MatrixField& b) {
  double m = 0;
  for (std::size_t e = 0; e < a.c.size(); ++e) m = std::max(m, max_abs_diff(a.c[e], b.c[e]));
  return m;
}

}  // namespace

TEST_CASE("cofactor of the zero displacement is the identity", "[geometry]") {
  for (int dim : {2, 3}) {
    const Grid g = Grid::cube(dim, 8);
    const CofactorData cd = cofactor_matrices(VectorField(g));
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        CHECK(max_abs(cd.A.at(i, j)) == (i == j ? 1.0 : 0.0));
        CHECK(max_abs(cd.B1.at(i, j)) == 0.0);
        CHECK(max_abs(cd.B2.at(i, j)) == 0.0);
      }
    for (const auto& G : cd.graded)
      for (const auto& e : G.c) CHECK(max_abs(e) == 0.0);
  }
}

TEST_CASE("single shear: A = I - grad Y^T equals the inverse transpose", "[geometry]") {
  const Grid g = Grid::cube(3, 16);
  const double eps = 0.3;
  VectorField Y(g);
  Y.c[1] = make_scalar(g, [&](const Vec3& x) { return eps * std::sin(x[0]); }).v;
  const CofactorData cd = cofactor_matrices(Y);
  for (const auto& e : cd.B2.c) CHECK(max_abs(e) <= 1e-15);
  double err = 0;
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    Mat3 F = identity3();
    F[1 * 3 + 0] += eps * std::cos(g.point(p)[0]);
    const Mat3 Ait = transpose3(inverse3(F));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        err = std::max(err, std::abs(cd.A.at(i, j)[p] - Ait[i * 3 + j]));
        const double expect = (i == j ? 1.0 : 0.0) - (i == 0 && j == 1 ? eps * std::cos(g.point(p)[0]) : 0.0);
        err = std::max(err, std::abs(cd.A.at(i, j)[p] - expect));
      }
  }
  CHECK(err <= 1e-12);
  // graded pieces: G1 = B1 + B1^T, G2 = B1^T B1, G3 = G4 = 0
  double e1 = 0, e2 = 0, e34 = 0;
  for (std::size_t p = 0; p < g.num_points(); ++p)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        e1 = std::max(e1, std::abs(cd.graded[0].at(i, j)[p] - cd.B1.at(i, j)[p] - cd.B1.at(j, i)[p]));
        double s = 0;
        for (int k = 0; k < 3; ++k) s += cd.B1.at(k, i)[p] * cd.B1.at(k, j)[p];
        e2 = std::max(e2, std::abs(cd.graded[1].at(i, j)[p] - s));
        e34 = std::max({e34, std::abs(cd.graded[2].at(i, j)[p]), std::abs(cd.graded[3].at(i, j)[p])});
      }
  CHECK(e1 <= 1e-12);
  CHECK(e2 <= 1e-12);
  CHECK(e34 <= 1e-12);
}

TEST_CASE("quadratic cofactor part matches a brute-force adjugate", "[geometry]") {
  const Grid g = Grid::cube(3, 16);
  const double a = 0.4, c = -0.7;
  VectorField Y(g);
  Y.c[2] = make_scalar(g, [&](const Vec3& x) { return a * std::sin(x[1]); }).v;
  Y.c[1] = make_scalar(g, [&](const Vec3& x) { return c * std::sin(x[2]); }).v;
  const CofactorData cd = cofactor_matrices(Y);
  double e11 = 0, eadj = 0;
  const auto G = spectral_gradient(Y);
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    const Vec3 x = g.point(p);
    e11 = std::max(e11, std::abs(cd.B2.at(0, 0)[p] + a * std::cos(x[1]) * c * std::cos(x[2])));
    Mat3 F = gradient_at(G, 3, p);
    for (int i = 0; i < 3; ++i) F[i * 4] += 1.0;
    const Mat3 C = cofactor_oracle(F);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) eadj = std::max(eadj, std::abs(cd.A.at(i, j)[p] - C[i * 3 + j]));
  }
  CHECK(e11 <= 1e-12);
  CHECK(eadj <= 1e-12);
}

TEST_CASE("cofactor identities on random displacements", "[geometry]") {
  std::mt19937_64 rng(17);
  for (int dim : {2, 3}) {
    const Grid g(dim, {16, 8, 8}, {2 * pi, 3.0, 4.0});
    const VectorField Y = random_vector(g, 2, 4, rng, 0.05);
    const CofactorData cd = cofactor_matrices(Y);
    const ScalarField det = jacobian_determinant(Y);
    const auto G = spectral_gradient(Y);
    double e_sum = 0, e_adj = 0, e_graded = 0, e_det = 0;
    for (std::size_t p = 0; p < g.num_points(); ++p) {
      Mat3 F = gradient_at(G, dim, p);
      for (int i = 0; i < dim; ++i) F[i * 4] += 1.0;
      if (dim == 2) F[8] = 1.0;
      const Mat3 C = cofactor_oracle(F);
      e_det = std::max(e_det, std::abs(det[p] - det3(F)));
      Mat3 A{};
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
          A[i * 3 + j] = cd.A.at(i, j)[p];
          e_sum = std::max(e_sum, std::abs(cd.A.at(i, j)[p] - (i == j) - cd.B1.at(i, j)[p] - cd.B2.at(i, j)[p]));
          e_adj = std::max(e_adj, std::abs(cd.A.at(i, j)[p] - C[i * 3 + j]));
        }
      // A^T A - I against the graded sum
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
          double m = -(i == j ? 1.0 : 0.0);
          for (int k = 0; k < dim; ++k) m += A[k * 3 + i] * A[k * 3 + j];
          double s = 0;
          for (const auto& Gd : cd.graded) s += Gd.at(i, j)[p];
          e_graded = std::max(e_graded, std::abs(s - m));
        }
    }
    CHECK(e_sum <= 1e-12);
    CHECK(e_adj <= 1e-12);
    CHECK(e_graded <= 1e-12);
    CHECK(e_det <= 1e-12);
  }
}

TEST_CASE("graded metric pieces are homogeneous", "[geometry]") {
  std::mt19937_64 rng(23);
  const Grid g = Grid::cube(3, 8);
  const VectorField Y = random_vector(g, 2, 4, rng, 0.2);
  const auto G = metric_graded(Y);
  for (double s : {0.5, 0.25}) {
    const auto Gs = metric_graded(scaled(Y, s));
    for (int d = 0; d < 4; ++d) {
      double num = 0, den = 0;
      for (std::size_t e = 0; e < G[d].c.size(); ++e)
        for (std::size_t p = 0; p < g.num_points(); ++p) {
          num = std::max(num, std::abs(Gs[d].c[e][p] - std::pow(s, d + 1) * G[d].c[e][p]));
          den = std::max(den, std::abs(std::pow(s, d + 1) * G[d].c[e][p]));
        }
      CHECK(num <= 1e-8 * den);
    }
  }
}

TEST_CASE("A (I + grad Y)^T equals det times identity", "[geometry]") {
  const Grid g = Grid::cube(3, 16);
  const FlowState s = small_state(g, 0.05, 3);
  const CofactorData cd = cofactor_matrices(s.Y);
  const auto G = spectral_gradient(s.Y);
  double err = 0;
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    Mat3 F = gradient_at(G, 3, p);
    for (int i = 0; i < 3; ++i) F[i * 4] += 1.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double m = 0;
        for (int k = 0; k < 3; ++k) m += cd.A.at(i, k)[p] * F[j * 3 + k];
        err = std::max(err, std::abs(m - (i == j ? det3(F) : 0.0)));
      }
  }
  CHECK(err <= 1e-13);
}

TEST_CASE("Jacobian determinant examples", "[geometry]") {
  const Grid g = Grid::cube(3, 16);
  CHECK(max_abs_diff(jacobian_determinant(VectorField(g)).v, RealArray(g.num_points(), 1.0)) == 0.0);
  const double eps = 0.2;
  VectorField sh(g), st(g);
  sh.c[0] = make_scalar(g, [&](const Vec3& x) { return eps * std::sin(x[1]); }).v;
  st.c[0] = make_scalar(g, [&](const Vec3& x) { return eps * std::sin(x[0]); }).v;
  CHECK(det_drift(sh) <= 1e-15);
  const ScalarField d = jacobian_determinant(st);
  double err = 0;
  for (std::size_t p = 0; p < g.num_points(); ++p) err = std::max(err, std::abs(d[p] - 1 - eps * std::cos(g.point(p)[0])));
  CHECK(err <= 1e-12);
  CHECK(det_drift(st) == Catch::Approx(eps).epsilon(1e-12));
}

TEST_CASE("pushforward fields", "[geometry]") {
  const Grid g = Grid::cube(3, 8);
  const TrajectorySamples z = pushforward_fields(FlowState::zero(g));
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    const Vec3 y = g.point(p);
    for (int i = 0; i < 3; ++i) {
      CHECK(z.X.c[i][p] == y[i]);
      CHECK(z.u.c[i][p] == 0.0);
      CHECK(z.b.c[i][p] == (i == 0 ? 1.0 : 0.0));
    }
  }
  FlowState s = FlowState::zero(g);
  s.Y.c[1] = make_scalar(g, [](const Vec3& x) { return 0.1 * std::sin(2 * x[0]) * std::cos(x[2]); }).v;
  s.Yt.c[2] = make_scalar(g, [](const Vec3& x) { return 0.3 * std::cos(x[1]); }).v;
  const TrajectorySamples t = pushforward_fields(s);
  double eb = 0;
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    const Vec3 y = g.point(p);
    eb = std::max(eb, std::abs(t.b.c[1][p] - 0.2 * std::cos(2 * y[0]) * std::cos(y[2])));
    eb = std::max(eb, std::abs(t.b.c[0][p] - 1.0));
    CHECK(t.X.c[1][p] == y[1] + s.Y.c[1][p]);
  }
  CHECK(eb <= 1e-13);
  CHECK(t.u.c[2] == s.Yt.c[2]);
}

TEST_CASE("initial map of the constant field is the identity", "[geometry]") {
  for (int dim : {2, 3}) {
    const Grid g = Grid::cube(dim, 8);
    VectorField b0(g);
    b0.c[0].assign(g.num_points(), 1.0);
    const InitialMap m = construct_initial_map(b0, 1e-10);
    CHECK(m.residual_e1 == 0.0);
    CHECK(m.residual_det <= 1e-15);
    CHECK(m.iterations == 0);
    double ex = 0, ea = 0;
    for (std::size_t p = 0; p < g.num_points(); ++p) {
      Vec3 y = g.point(p);
      y[0] = imap::centered_y1(g, int(p / (g.num_points() / g.size(0))));
      for (int i = 0; i < dim; ++i) {
        ex = std::max(ex, std::abs(m.X0.c[i][p] - y[i]));
        for (int j = 0; j < dim; ++j) ea = std::max(ea, std::abs(m.A0.at(i, j)[p] - (i == j)));
      }
    }
    CHECK(ex <= 1e-13);
    CHECK(ea <= 1e-15);
  }
}

TEST_CASE("initial map of a perturbed field straightens b0", "[geometry]") {
  std::mt19937_64 rng(31);
  const Grid g = Grid::cube(3, 32);
  VectorField b0 = random_solenoidal(g, 2, 4, rng, 1.0);
  const double s = 0.05 / max_abs(b0);
  b0 = scaled(b0, s);
  for (double& x : b0.c[0]) x += 1.0;
  const InitialMap m = construct_initial_map(b0, 1e-8);
  CHECK(m.residual_e1 <= 1e-8);
  CHECK(m.residual_det <= 1e-8);
  CHECK(m.plane_residual <= 1e-9);

  // independent check: columns [b0(X0), d2 X0, d3 X0] with transverse derivatives taken per line
  const std::size_t n = g.num_points();
  VectorField D = m.X0;
  for (std::size_t p = 0; p < n; ++p)
    for (int i = 1; i < 3; ++i) D.c[i][p] -= g.point(p)[i];
  std::array<ScalarField, 6> dX;
  for (int i = 0; i < 3; ++i)
    for (int a = 1; a < 3; ++a) {
      ScalarField f(g);
      f.v = D.c[i];
      std::array<int, 3> al{0, 0, 0};
      al[a] = 1;
      dX[i * 2 + a - 1] = partial_derivative(f, al);
    }
  std::vector<Vec3> pts(n);
  for (std::size_t p = 0; p < n; ++p) pts[p] = {m.X0.c[0][p], m.X0.c[1][p], m.X0.c[2][p]};
  const auto bx = evaluate_at_flow(b0, pts);
  double edet = 0, eA = 0;
  for (std::size_t p = 0; p < n; ++p) {
    Mat3 F{};
    for (int i = 0; i < 3; ++i) {
      F[i * 3] = bx[p][i];
      F[i * 3 + 1] = dX[i * 2][p] + (i == 1);
      F[i * 3 + 2] = dX[i * 2 + 1][p] + (i == 2);
    }
    edet = std::max(edet, std::abs(det3(F) - 1));
    const Mat3 Ait = transpose3(inverse3(F));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) eA = std::max(eA, std::abs(Ait[i * 3 + j] - m.A0.at(i, j)[p]));
  }
  CHECK(edet <= 1e-8);
  CHECK(eA <= 1e-8);

  // consecutive y1 samples are linked by the flow of b0; independent RK4 with fine steps
  const std::size_t ntr = n / 32;
  const Interpolant B(b0);
  auto field = [&](const Vec3& x) {
    double v[3];
    B.evaluate(x, v);
    return Vec3{v[0], v[1], v[2]};
  };
  double eode = 0;
  const double h = g.spacing(0) / 64;
  for (int i0 : {0, 5, 24})
    for (std::size_t r = 0; r < ntr; r += 67) {
      const std::size_t p = i0 * ntr + r, q = ((i0 + 1) % 32) * ntr + r;
      if (i0 + 1 == 16) continue;  // wraps to the negative half
      Vec3 x = pts[p];
      for (int k = 0; k < 64; ++k) {
        const Vec3 k1 = field(x);
        Vec3 y;
        for (int a = 0; a < 3; ++a) y[a] = x[a] + 0.5 * h * k1[a];
        const Vec3 k2 = field(y);
        for (int a = 0; a < 3; ++a) y[a] = x[a] + 0.5 * h * k2[a];
        const Vec3 k3 = field(y);
        for (int a = 0; a < 3; ++a) y[a] = x[a] + h * k3[a];
        const Vec3 k4 = field(y);
        for (int a = 0; a < 3; ++a) x[a] += h / 6 * (k1[a] + 2 * k2[a] + 2 * k3[a] + k4[a]);
      }
      for (int a = 0; a < 3; ++a) eode = std::max(eode, std::abs(x[a] - pts[q][a]));
    }
  CHECK(eode <= 1e-9);
}

TEST_CASE("initial map rejects bad fields", "[geometry]") {
  const Grid g = Grid::cube(3, 8);
  VectorField touch(g);
  touch.c[0] = make_scalar(g, [](const Vec3& x) { return 1.0 - std::cos(x[1]); }).v;
  CHECK_THROWS_AS(construct_initial_map(touch, 1e-8), ConstructionFailed);
  VectorField comp(g);
  comp.c[0] = make_scalar(g, [](const Vec3& x) { return 1.0 + 0.1 * std::sin(x[0]); }).v;
  CHECK_THROWS_AS(construct_initial_map(comp, 1e-8), InvalidArgument);
}
