#pragma once

#include <algorithm>
#include <string>
#include <utility>

#include "mhdl/core.hpp"

namespace mhdl {

struct DecayFit {
  std::string quantity;
  double t0 = 0, t1 = 0;
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
  std::size_t points = 0;
};

// Least squares of log(value) against log(t + 1) over samples with t in [t0, t1].
inline DecayFit fit_decay_rate(const std::vector<std::pair<double, double>>& series, double t0, double t1,
                               const std::string& quantity = "") {
  if (!(t1 > t0)) throw InvalidArgument("decay-fit window is empty");
  std::vector<double> x, y;
  for (const auto& [t, v] : series) {
    if (t < t0 - 1e-12 || t > t1 + 1e-12) continue;
    if (!(v > 0)) throw InvalidArgument("decay fit needs positive values, got " + std::to_string(v) + " at t = " +
                                        std::to_string(t));
    x.push_back(std::log(t + 1));
    y.push_back(std::log(v));
  }
  if (x.size() < 10) throw InvalidArgument("decay fit needs at least 10 points in the window");
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  DecayFit f;
  f.quantity = quantity;
  f.t0 = t0;
  f.t1 = t1;
  f.points = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return f;
}

// Slope of log y against log x, no shift.
inline DecayFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys, const std::string& quantity = "") {
  if (xs.size() != ys.size() || xs.size() < 2) throw InvalidArgument("power-law fit needs at least 2 points");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0) || !(ys[i] > 0)) throw InvalidArgument("power-law fit needs positive values");
    x.push_back(std::log(xs[i]));
    y.push_back(std::log(ys[i]));
  }
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  DecayFit f;
  f.quantity = quantity;
  f.points = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return f;
}

}  // namespace mhdl
