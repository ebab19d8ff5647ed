#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <functional>

#include "mhdl/propagator.hpp"
#include "mhdl/spectral_ops.hpp"

namespace mhdl {

// Squared norm |d^a Y|_{H^s}^2 or |d^a Yt|_{H^s}^2 whose derivative part has symbol |k|^(2 pk) k1^(2 pl).
struct NormSpec {
  std::string name;
  bool velocity = true;  // Yt if true, Y otherwise
  int sobolev = 2;
  int pow_ksq = 1;
  int pow_k1sq = 0;
};

inline NormSpec grad_Yt_H2() { return {"grad_Yt_H2", true, 2, 1, 0}; }
inline NormSpec grad_d1_Yt_H1() { return {"grad_d1_Yt_H1", true, 1, 1, 1}; }

// Radially described whole-space data: (Y0^, Y1^) as functions of (k1, |k'|).
struct DecayProfile {
  enum class Support { Full, TransversePlane };
  std::function<double(double, double)> Y0;
  std::function<double(double, double)> Y1;
  Support support = Support::Full;
  double k_max = 4.0;
};

inline double smooth_bump(double r) { return r < 1 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0; }

// Y0^ = 0, Y1^ = |k|^(-beta) bump(|k|/k_max).
inline DecayProfile singular_velocity_profile(double beta, double k_max = 4.0) {
  DecayProfile p;
  p.Y0 = [](double, double) { return 0.0; };
  p.Y1 = [beta, k_max](double k1, double rho) {
    const double r = std::sqrt(k1 * k1 + rho * rho);
    return r > 0 ? std::pow(r, -beta) * smooth_bump(r / k_max) : 0.0;
  };
  p.k_max = k_max;
  return p;
}

inline DecayProfile bounded_velocity_profile(double k_max = 4.0) { return singular_velocity_profile(0.0, k_max); }

struct DecayOracleOptions {
  int dimension = 3;
  double k_min = 1e-10;
  double rel_tol = 1e-9;
  double accept_tol = 1e-6;
  unsigned max_depth = 18;
};

namespace oracle {

// Azimuthal mean of w_s over the transverse circle; a uniform rule is exact for these trig polynomials.
inline double mean_weight(double k1, double rho, int dim, int s) {
  if (dim == 2) return hs_weight({k1, rho, 0.0}, 2, s);
  constexpr int n = 16;
  double acc = 0;
  for (int j = 0; j < n; ++j) {
    const double ph = 2 * pi * j / n;
    acc += hs_weight({k1, rho * std::cos(ph), rho * std::sin(ph)}, 3, s);
  }
  return acc / n;
}

inline double solution(const DecayProfile& prof, const NormSpec& spec, double k1, double rho, double t) {
  const double L = k1 * k1, K = L + rho * rho;
  const double y0 = prof.Y0(k1, rho), y1 = prof.Y1(k1, rho);
  if (y0 == 0 && y1 == 0) return 0.0;
  const PropagatorBlock P = propagator_block(L, K, t);
  return spec.velocity ? P.m[1][0] * y0 + P.m[1][1] * y1 : P.m[0][0] * y0 + P.m[0][1] * y1;
}

inline double symbol(const NormSpec& spec, double k1, double rho, int dim) {
  const double L = k1 * k1, K = L + rho * rho;
  return std::pow(K, spec.pow_ksq) * std::pow(L, spec.pow_k1sq) * mean_weight(k1, rho, dim, spec.sobolev);
}

template <class F>
double integrate_raw(F f, double a, double b, const DecayOracleOptions& o, double& err) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, o.max_depth, o.rel_tol, &err);
}

template <class F>
double integrate_checked(F f, double a, double b, const DecayOracleOptions& o, const std::string& region) {
  double err = 0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, o.max_depth, o.rel_tol, &err);
  if (!std::isfinite(v) || err > o.accept_tol * std::abs(v) + 1e-300)
    throw QuadratureFailure("quadrature did not reach tolerance on " + region + " (estimate " + std::to_string(v) +
                            ", error " + std::to_string(err) + ")");
  return v;
}

}  // namespace oracle

// Norms of the exact whole-space linear solution, by adaptive quadrature over continuous wavenumbers.
inline std::vector<double> linear_decay_oracle(const NormSpec& spec, const std::vector<double>& t_grid,
                                               const DecayProfile& prof,
                                               const DecayOracleOptions& opt = {}) {
  if (opt.dimension != 2 && opt.dimension != 3) throw InvalidArgument("oracle dimension must be 2 or 3");
  const int dim = opt.dimension;
  const double lo = std::log(opt.k_min), hi = std::log(prof.k_max);
  const double plancherel = std::pow(2 * pi, -dim);
  const double transverse_measure = dim == 3 ? 2 * pi : 2.0;  // circle length factor / two signs
  std::vector<double> out;
  for (double t : t_grid) {
    double total = 0;
    if (prof.support == DecayProfile::Support::TransversePlane) {
      // density on {k1 = 0}: integrate over the transverse plane only
      auto f = [&](double v) {
        const double rho = std::exp(v);
        const double y = oracle::solution(prof, spec, 0.0, rho, t);
        const double jac = dim == 3 ? rho * rho : rho;
        return oracle::symbol(spec, 0.0, rho, dim) * y * y * jac * transverse_measure;
      };
      total = oracle::integrate_checked(f, lo, hi, opt, "rho in [" + std::to_string(opt.k_min) + ", " +
                                                         std::to_string(prof.k_max) + "], k1 = 0");
      total *= std::pow(2 * pi, -(dim - 1));
    } else {
      // inner errors are judged by what they can add to the outer integral
      double worst = 0, worst_k1 = 0;
      auto outer = [&](double u) {
        const double k1 = std::exp(u);
        auto inner = [&](double v) {
          const double rho = std::exp(v);
          if (k1 * k1 + rho * rho >= prof.k_max * prof.k_max) return 0.0;
          const double y = oracle::solution(prof, spec, k1, rho, t);
          const double jac = dim == 3 ? rho * rho : rho;
          return oracle::symbol(spec, k1, rho, dim) * y * y * jac * transverse_measure;
        };
        double err = 0;
        const double val = oracle::integrate_raw(inner, lo, hi, opt, err);
        if (!std::isfinite(val) || !std::isfinite(err))
          throw QuadratureFailure("non-finite inner integral at k1 = " + std::to_string(k1) + ", t = " + std::to_string(t));
        if (2.0 * k1 * err > worst) {
          worst = 2.0 * k1 * err;
          worst_k1 = k1;
        }
        return 2.0 * k1 * val;
      };
      const double outer_total = oracle::integrate_checked(outer, lo, hi, opt, "k1 range, t = " + std::to_string(t));
      if (worst * (hi - lo) > opt.accept_tol * std::abs(outer_total) + 1e-300)
        throw QuadratureFailure("inner quadrature error too large at k1 = " + std::to_string(worst_k1) +
                                ", t = " + std::to_string(t) + " (bound " + std::to_string(worst * (hi - lo)) +
                                " against total " + std::to_string(outer_total) + ")");
      total = plancherel * outer_total;
    }
    out.push_back(std::sqrt(std::max(total, 0.0)));
  }
  return out;
}

}  // namespace mhdl
