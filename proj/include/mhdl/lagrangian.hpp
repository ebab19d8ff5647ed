#pragma once

#include "mhdl/force.hpp"
#include "mhdl/propagator.hpp"

namespace mhdl {

struct StepperOptions {
  bool nonlinear = true;
  ForceOptions force;
};

inline bool all_finite(const VectorSpectrum& s) {
  for (const auto& c : s.c)
    for (const auto& z : c)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

// Exponential time differencing, second order: exact linear propagation per mode,
// predictor-corrector on the nonlinear force.
class LagrangianStepper {
 public:
  LagrangianStepper(const Grid& g, double dt, StepperOptions opt = {})
      : grid_(g), dt_(dt), opt_(opt) {
    if (!(dt > 0)) throw InvalidArgument("dt must be positive");
    coef_ = etd_coefficients(g, dt);
  }

  double dt() const { return dt_; }
  const Grid& grid() const { return grid_; }
  const StepperOptions& options() const { return opt_; }

  // Advances (Y, Yt) in place. If `start` is non-null it receives the force at the old state.
  void step_spectral(VectorSpectrum& Y, VectorSpectrum& Yt, NonlinearForce* start = nullptr) const {
    const int d = grid_.dim();
    const std::size_t nm = grid_.num_modes();
    const auto& t = grid_.tables();
    if (!opt_.nonlinear) {
      for (int i = 0; i < d; ++i)
        for (std::size_t q = 0; q < nm; ++q) {
          const double k1sq = t.kappa[0][q] * t.kappa[0][q];
          const Complex y = Y.c[i][q], v = Yt.c[i][q];
          Y.c[i][q] = coef_.alpha[0][q] * y + coef_.beta[0][q] * v;
          Yt.c[i][q] = -k1sq * coef_.beta[0][q] * y + coef_.delta[0][q] * v;
        }
      if (start) *start = NonlinearForce{};
      check(Y, Yt);
      return;
    }
    NonlinearForce Fn = compute_force_spectral(Y, Yt, opt_.force);
    for (int i = 0; i < d; ++i)
      for (std::size_t q = 0; q < nm; ++q) {
        const double k1sq = t.kappa[0][q] * t.kappa[0][q];
        const Complex y = Y.c[i][q], v = Yt.c[i][q], f = Fn.f_exact.c[i][q];
        Y.c[i][q] = coef_.alpha[0][q] * y + coef_.beta[0][q] * v + coef_.beta[1][q] * f;
        Yt.c[i][q] = -k1sq * coef_.beta[0][q] * y + coef_.delta[0][q] * v + coef_.delta[1][q] * f;
      }
    const NonlinearForce Fa = compute_force_spectral(Y, Yt, opt_.force);
    for (int i = 0; i < d; ++i)
      for (std::size_t q = 0; q < nm; ++q) {
        const Complex df = Fa.f_exact.c[i][q] - Fn.f_exact.c[i][q];
        Y.c[i][q] += coef_.beta[2][q] * df;
        Yt.c[i][q] += coef_.delta[2][q] * df;
      }
    check(Y, Yt);
    if (start) *start = std::move(Fn);
  }

  FlowState step(const FlowState& s, NonlinearForce* start = nullptr) const {
    require_same_grid(s.grid(), grid_, "step_lagrangian");
    VectorSpectrum Y = forward(s.Y), Yt = forward(s.Yt);
    step_spectral(Y, Yt, start);
    return {inverse(Y), inverse(Yt), s.t + dt_};
  }

 private:
  static void check(const VectorSpectrum& Y, const VectorSpectrum& Yt) {
    if (!all_finite(Y) || !all_finite(Yt)) throw SolverAbort("non-finite values in Lagrangian state");
  }

  Grid grid_;
  double dt_;
  StepperOptions opt_;
  EtdCoefficients coef_;
};

inline FlowState step_lagrangian(const FlowState& s, double dt, const StepperOptions& opt = {}) {
  return LagrangianStepper(s.grid(), dt, opt).step(s);
}

}  // namespace mhdl
