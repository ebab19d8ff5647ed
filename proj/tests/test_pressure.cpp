#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace mhdl;
using namespace testing;

namespace {

struct Wave {
  Vec3 k, e;
  double phase;
};

// R[ rowdiv(-V (x) V) ] for V = sum_a e_a cos(k_a.x + phi_a), by direct expansion of the products
Vec3 two_wave_oracle(const std::vector<Wave>& w, const Vec3& x) {
  Vec3 out{0, 0, 0};
  for (const auto& a : w)
    for (const auto& b : w)
      for (int sgn : {1, -1}) {
        Vec3 q;
        for (int i = 0; i < 3; ++i) q[i] = a.k[i] + sgn * b.k[i];
        const double qq = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
        if (qq == 0) continue;
        const double eb_ka = b.e[0] * a.k[0] + b.e[1] * a.k[1] + b.e[2] * a.k[2];
        const double th = a.k[0] * x[0] + a.k[1] * x[1] + a.k[2] * x[2] + a.phase +
                          sgn * (b.k[0] * x[0] + b.k[1] * x[1] + b.k[2] * x[2] + b.phase);
        // rowdiv component i: e_a,i (e_b . k_a) sin(th) / 2, then the multiplier q (q . v) / |q|^2
        const double qe = q[0] * a.e[0] + q[1] * a.e[1] + q[2] * a.e[2];
        for (int i = 0; i < 3; ++i) out[i] += q[i] * qe / qq * eb_ka * std::sin(th) / 2;
      }
  return out;
}

FlowState scaled_state(const FlowState& s, double f) { return {scaled(s.Y, f), scaled(s.Yt, f), s.t}; }

double hs_norm(const VectorField& v, int s) { return std::sqrt(hs_inner_product(v, v, s)); }

}  // namespace

TEST_CASE("pressure rhs vanishes at equilibrium", "[pressure]") {
  const Grid g = Grid::cube(3, 8);
  const FlowState z = FlowState::zero(g);
  const VectorField r = pressure_rhs(z, cofactor_matrices(z.Y));
  CHECK(max_abs(r) == 0.0);
  const PressureSolution ps = solve_pressure_gradient(z, cofactor_matrices(z.Y));
  CHECK(max_abs(ps.grad_p) == 0.0);
}

TEST_CASE("pressure rhs with Y = 0 matches a direct convolution oracle", "[pressure]") {
  const Grid g = Grid::cube(3, 16);
  const double s2 = 1 / std::sqrt(2.0);
  const std::vector<Wave> w = {{{1, 1, 0}, {0.3 * s2, -0.3 * s2, 0.0}, 0.4},
                               {{0, 1, 2}, {0.5, 0.0, 0.0}, -1.1}};
  FlowState st = FlowState::zero(g);
  st.Yt = make_vector(g, [&](const Vec3& x) {
    Vec3 v{0, 0, 0};
    for (const auto& m : w) {
      const double c = std::cos(m.k[0] * x[0] + m.k[1] * x[1] + m.k[2] * x[2] + m.phase);
      for (int i = 0; i < 3; ++i) v[i] += m.e[i] * c;
    }
    return v;
  });
  const VectorField r = pressure_rhs(st, cofactor_matrices(st.Y));
  double err = 0, scale = 0;
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    const Vec3 o = two_wave_oracle(w, g.point(p));
    for (int i = 0; i < 3; ++i) {
      err = std::max(err, std::abs(r.c[i][p] - o[i]));
      scale = std::max(scale, std::abs(o[i]));
    }
  }
  CHECK(scale > 1e-3);
  CHECK(err <= 1e-10);

  // A = I: the solve is the rhs after one iteration (up to an FFT round trip)
  const PressureSolution ps = solve_pressure_gradient(st, cofactor_matrices(st.Y));
  CHECK(ps.iterations == 1);
  CHECK(max_abs_diff(ps.grad_p, r) <= 1e-15 * scale);
}

TEST_CASE("pressure rhs is antisymmetric under swapping d1 Y and Yt", "[pressure]") {
  const Grid g = Grid::cube(3, 16);
  const FlowState s = small_state(g, 0.05, 4);
  const CofactorData cd = cofactor_matrices(s.Y);
  std::vector<RealArray> d1Y;
  for (int i = 0; i < 3; ++i) d1Y.push_back(inverse(g, differentiated(g, forward(g, s.Y.c[i]), 0)));
  const VectorField a = inverse(press::rhs(g, cd.A.c, d1Y, s.Yt.c));
  const VectorField b = inverse(press::rhs(g, cd.A.c, s.Yt.c, d1Y));
  CHECK(max_abs(a) > 0);
  CHECK(max_abs(added(a, b)) == 0.0);
}

TEST_CASE("pressure fixed point on small states", "[pressure]") {
  const Grid g = Grid::cube(3, 16);
  const FlowState s = small_state(g, 0.02, 9);
  const CofactorData cd = cofactor_matrices(s.Y);
  const double tol = 1e-10;
  const PressureSolution ps = solve_pressure_gradient(s, cd, tol, 50);
  const VectorField rhs = pressure_rhs(s, cd);
  CHECK(ps.iterations <= 10);
  CHECK(ps.contraction_estimate < 1);
  // residuals decrease once contracting; last one below tolerance
  for (std::size_t i = 2; i < ps.residuals.size(); ++i) CHECK(ps.residuals[i] < ps.residuals[i - 1]);
  CHECK(ps.residuals.back() <= tol * l2_norm(rhs));
  // re-substituted defect
  CHECK(pressure_defect(cd, ps.grad_p, rhs) <= 2 * tol * l2_norm(rhs));
  // the solution is a gradient
  CHECK(l2_norm(leray_project(ps.grad_p)) <= 1e-10);
  // and is the gradient of the reconstructed zero-mean pressure
  const ScalarField p = pressure_from_gradient(ps.grad_p_hat);
  double mean = 0;
  for (double x : p.v) mean += x;
  CHECK(std::abs(mean) / double(g.num_points()) <= 1e-16 + 1e-12 * max_abs(p.v));
  VectorField gp(g);
  for (int a = 0; a < 3; ++a) {
    std::array<int, 3> al{0, 0, 0};
    al[a] = 1;
    gp.c[a] = partial_derivative(p, al).v;
  }
  CHECK(max_abs_diff(gp, ps.grad_p) <= 1e-12 * std::max(1e-300, max_abs(ps.grad_p)) + 1e-18);
}

TEST_CASE("pressure solve is linear in the rhs", "[pressure]") {
  const Grid g = Grid::cube(3, 16);
  const FlowState s = small_state(g, 0.02, 5);
  const CofactorData cd = cofactor_matrices(s.Y);
  const VectorField rhs = pressure_rhs(s, cd);
  const PressureSolution a = solve_pressure_with_rhs(cd, rhs, 1e-13);
  const PressureSolution b = solve_pressure_with_rhs(cd, scaled(rhs, 2.0), 1e-13);
  CHECK(max_abs_diff(b.grad_p, scaled(a.grad_p, 2.0)) <= 1e-10 * max_abs(b.grad_p));
}

TEST_CASE("contraction ratio is proportional to amplitude", "[pressure]") {
  const Grid g = Grid::cube(3, 16);
  const FlowState base = small_state(g, 0.04, 12);
  auto ratio = [&](double f) {
    const FlowState s = scaled_state(base, f);
    return solve_pressure_gradient(s, cofactor_matrices(s.Y), 1e-12).contraction_estimate;
  };
  const double r1 = ratio(1.0), r2 = ratio(0.5), r4 = ratio(0.25);
  INFO("ratios " << r1 << " " << r2 << " " << r4);
  CHECK(r1 < 1);
  CHECK(r2 / r1 == Catch::Approx(0.5).epsilon(0.25));
  CHECK(r4 / r2 == Catch::Approx(0.5).epsilon(0.25));
}

TEST_CASE("pressure gradient is quadratic in the state amplitude", "[pressure]") {
  const Grid g = Grid::cube(3, 16);
  const FlowState base = small_state(g, 0.04, 6);
  auto norm = [&](double f) {
    const FlowState s = scaled_state(base, f);
    return hs_norm(solve_pressure_gradient(s, cofactor_matrices(s.Y), 1e-12).grad_p, 2);
  };
  const double n1 = norm(1.0), n2 = norm(0.5), n4 = norm(0.25);
  const double r1 = n1 / n2, r2 = n2 / n4;
  INFO("ratios " << r1 << " " << r2);
  CHECK(std::log2(r1) == Catch::Approx(2.0).margin(0.1));
  CHECK(std::log2(r2) == Catch::Approx(2.0).margin(0.1));
  // corrections shrink like s
  CHECK(std::abs(r2 - 4) <= 0.75 * std::abs(r1 - 4) + 1e-6);
}

TEST_CASE("pressure iteration errors", "[pressure]") {
  const Grid g = Grid::cube(3, 16);
  const FlowState s = small_state(g, 0.02, 9);
  const CofactorData cd = cofactor_matrices(s.Y);
  CHECK_THROWS_AS(solve_pressure_gradient(s, cd, 1e-14, 1), NotConverged);
  CHECK_THROWS_AS(solve_pressure_gradient(s, cd, -1.0, 10), InvalidArgument);
  // large shear deformation breaks contraction
  FlowState big = FlowState::zero(g);
  big.Y.c[0] = make_scalar(g, [](const Vec3& x) { return 3.0 * std::sin(x[1]) + 2.0 * std::sin(x[2]); }).v;
  big.Y.c[1] = make_scalar(g, [](const Vec3& x) { return 2.5 * std::sin(x[2]) + 1.5 * std::cos(x[0]); }).v;
  big.Yt.c[2] = make_scalar(g, [](const Vec3& x) { return std::sin(x[0] + x[1]); }).v;
  CHECK_THROWS_AS(solve_pressure_gradient(big, cofactor_matrices(big.Y), 1e-10, 200), PressureDivergence);
}
