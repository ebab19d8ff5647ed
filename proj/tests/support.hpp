#pragma once

#include <random>

#include "mhdl/mhdl.hpp"

namespace testing {

using namespace mhdl;

// Real trigonometric polynomial with integer wavenumbers; exact oracle for values and derivatives.
struct TrigSum {
  struct Term {
    std::array<int, 3> m{};
    double a = 0, b = 0;  // a cos + b sin
  };
  std::vector<Term> terms;
  std::array<double, 3> L{2 * pi, 2 * pi, 2 * pi};

  double phase(const Term& t, const Vec3& x) const {
    double s = 0;
    for (int i = 0; i < 3; ++i) s += 2 * pi * t.m[i] / L[i] * x[i];
    return s;
  }
  double value(const Vec3& x) const {
    double v = 0;
    for (const auto& t : terms) v += t.a * std::cos(phase(t, x)) + t.b * std::sin(phase(t, x));
    return v;
  }
  // derivative of order alpha
  double derivative(const Vec3& x, const std::array<int, 3>& alpha) const {
    double v = 0;
    for (const auto& t : terms) {
      double mag = 1;
      int order = 0;
      for (int i = 0; i < 3; ++i)
        for (int r = 0; r < alpha[i]; ++r) {
          mag *= 2 * pi * t.m[i] / L[i];
          ++order;
        }
      const double th = phase(t, x);
      // d^n of cos = cos(th + n pi/2), of sin = sin(th + n pi/2)
      v += mag * (t.a * std::cos(th + order * pi / 2) + t.b * std::sin(th + order * pi / 2));
    }
    return v;
  }
};

inline TrigSum random_trig(const Grid& g, int kmax, int count, std::mt19937_64& rng, double amp = 1.0) {
  TrigSum s;
  for (int a = 0; a < 3; ++a) s.L[a] = g.length(a);
  std::uniform_int_distribution<int> pick(-kmax, kmax);
  std::normal_distribution<double> nrm(0.0, amp);
  for (int c = 0; c < count; ++c) {
    TrigSum::Term t;
    for (int a = 0; a < g.dim(); ++a) t.m[a] = pick(rng);
    t.a = nrm(rng);
    t.b = nrm(rng);
    s.terms.push_back(t);
  }
  return s;
}

inline ScalarField sample(const Grid& g, const TrigSum& s) {
  return make_scalar(g, [&](const Vec3& x) { return s.value(x); });
}

inline VectorField random_vector(const Grid& g, int kmax, int count, std::mt19937_64& rng, double amp = 1.0) {
  VectorField v(g);
  for (int i = 0; i < g.dim(); ++i) v.c[i] = sample(g, random_trig(g, kmax, count, rng, amp)).v;
  return v;
}

// Divergence-free random field: Leray projection of a random band-limited field.
inline VectorField random_solenoidal(const Grid& g, int kmax, int count, std::mt19937_64& rng, double amp = 1.0) {
  return leray_project(random_vector(g, kmax, count, rng, amp));
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline double max_abs_spectrum(const Spectrum& s) {
  double m = 0;
  for (const auto& z : s) m = std::max(m, std::abs(z));
  return m;
}

// Small random volume-preserving flow state built by the initial-data generator.
inline FlowState small_state(const Grid& g, double scale, std::uint64_t seed, int max_mode = 2, int count = 4) {
  InitialDataSpec spec;
  spec.seed = seed;
  spec.modes = random_modes(g.dim(), max_mode, count, seed);
  return generate_initial_data(g, spec, scale, false).lagrangian;
}

}  // namespace testing
