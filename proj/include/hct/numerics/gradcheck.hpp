#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "hct/error.hpp"

namespace hct {

/// (fn() at coordinate + h  -  fn() at coordinate - h) / 2h. `fn` reads the
/// coordinate through whatever state it closes over; the coordinate is
/// restored before returning.
template <class Fn>
double central_difference(Fn&& fn, double& coordinate, double h = 1e-4) {
  const double saved = coordinate;
  coordinate = saved + h;
  const double plus = fn();
  coordinate = saved - h;
  const double minus = fn();
  coordinate = saved;
  if (!std::isfinite(plus) || !std::isfinite(minus)) {
    fail(ErrorKind::oracle, "finite difference: objective is not finite");
  }
  return (plus - minus) / (2.0 * h);
}

/// Central-difference gradient of fn(params) over every coordinate.
template <class Fn>
Eigen::VectorXd finite_diff_gradient(Fn&& fn, std::span<double> params, double h = 1e-4) {
  if (!(h > 0.0)) fail(ErrorKind::oracle, "finite difference: step must be positive");
  Eigen::VectorXd grad(static_cast<Eigen::Index>(params.size()));
  const std::span<const double> view(params.data(), params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    grad(static_cast<Eigen::Index>(i)) = central_difference([&] { return fn(view); }, params[i], h);
  }
  return grad;
}

// |a - n| / max(|a|, |n|); exact agreement (including 0 vs 0) gives 0.
inline double relative_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  return scale == 0.0 ? 0.0 : std::abs(analytic - numeric) / scale;
}

}  // namespace hct
