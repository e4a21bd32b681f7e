#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hct/numerics/types.hpp"

namespace hct {

struct NadamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <class Scalar>
struct OptimizerState {
  NadamHyper hyper;
  std::vector<Matrix<Scalar>> m;
  std::vector<Matrix<Scalar>> v;
  std::int64_t t = 0;
};

template <class Scalar>
OptimizerState<Scalar> make_optimizer_state(std::span<const Matrix<Scalar>> params, const NadamHyper& hyper) {
  // beta1 = 0 is admitted: the update then degenerates to bias-corrected RMSProp.
  if (!(hyper.beta1 >= 0.0 && hyper.beta1 < 1.0) || !(hyper.beta2 > 0.0 && hyper.beta2 < 1.0)) {
    fail(ErrorKind::config, "nadam: beta1 must lie in [0, 1) and beta2 in (0, 1)");
  }
  if (!(hyper.learning_rate > 0.0) || !(hyper.epsilon > 0.0)) {
    fail(ErrorKind::config, "nadam: learning rate and epsilon must be positive");
  }
  OptimizerState<Scalar> state;
  state.hyper = hyper;
  for (const auto& p : params) {
    state.m.push_back(Matrix<Scalar>::Zero(p.rows(), p.cols()));
    state.v.push_back(Matrix<Scalar>::Zero(p.rows(), p.cols()));
  }
  return state;
}

/// One Nesterov-accelerated Adam step over every parameter array:
///
///   t += 1
///   m = b1 m + (1 - b1) g,   v = b2 v + (1 - b2) g^2
///   theta -= lr (b1 m / (1 - b1^t) + (1 - b1) g / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
template <class Scalar>
void nadam_step(std::span<Matrix<Scalar>> params, std::span<const Matrix<Scalar>> grads, OptimizerState<Scalar>& state) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    fail(ErrorKind::contract, "nadam: " + std::to_string(params.size()) + " parameters, " +
                                  std::to_string(grads.size()) + " gradients, " + std::to_string(state.m.size()) +
                                  " moment slots");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].rows() != grads[i].rows() || params[i].cols() != grads[i].cols() ||
        state.m[i].rows() != params[i].rows() || state.m[i].cols() != params[i].cols()) {
      fail(ErrorKind::contract, "nadam: shape mismatch at parameter " + std::to_string(i));
    }
  }
  state.t += 1;
  const NadamHyper& h = state.hyper;
  const double t = static_cast<double>(state.t);
  const double bc1 = 1.0 - std::pow(h.beta1, t);
  const double bc2 = 1.0 - std::pow(h.beta2, t);
  const auto b1 = static_cast<Scalar>(h.beta1);
  const auto b2 = static_cast<Scalar>(h.beta2);
  const auto lr = static_cast<Scalar>(h.learning_rate);
  const auto eps = static_cast<Scalar>(h.epsilon);
  const auto inv_bc1 = static_cast<Scalar>(1.0 / bc1);
  const auto inv_bc2 = static_cast<Scalar>(1.0 / bc2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto g = grads[i].array();
    auto m = state.m[i].array();
    auto v = state.v[i].array();
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.square();
    const auto m_hat = m * inv_bc1;
    const auto v_hat = v * inv_bc2;
    params[i].array() -= lr * (b1 * m_hat + (Scalar(1) - b1) * g * inv_bc1) / (v_hat.sqrt() + eps);
  }
}

}  // namespace hct
