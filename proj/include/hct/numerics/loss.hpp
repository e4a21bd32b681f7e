#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "hct/numerics/types.hpp"

namespace hct {

// Predicted probabilities are clamped to [eps, 1 - eps] before the log.
inline constexpr double kProbabilityClamp = 1e-7;
inline constexpr double kRowSumTolerance = 1e-5;

struct LossValue {
  double value = 0.0;
  std::vector<double> per_sample;
  Index samples = 0;
  Index classes = 0;  // 0 for the binary loss
};

inline double clamp_probability(double p) {
  return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

/// Mean binary cross-entropy of predicted PD probabilities against {0,1} labels.
template <class Scalar>
LossValue binary_cross_entropy(std::span<const Scalar> pred, std::span<const Scalar> labels) {
  if (pred.size() != labels.size()) {
    fail(ErrorKind::shape, "binary_cross_entropy: " + std::to_string(pred.size()) + " predictions vs " +
                               std::to_string(labels.size()) + " labels");
  }
  if (pred.empty()) fail(ErrorKind::contract, "binary_cross_entropy: empty batch");
  LossValue loss;
  loss.samples = static_cast<Index>(pred.size());
  loss.per_sample.reserve(pred.size());
  double total = 0.0;
  for (std::size_t m = 0; m < pred.size(); ++m) {
    const double a = static_cast<double>(labels[m]);
    if (a != 0.0 && a != 1.0) fail(ErrorKind::validation, "binary_cross_entropy: label must be 0 or 1");
    const double p = clamp_probability(static_cast<double>(pred[m]));
    const double term = -(a * std::log(p) + (1.0 - a) * std::log(1.0 - p));
    loss.per_sample.push_back(term);
    total += term;
  }
  loss.value = total / static_cast<double>(pred.size());
  return loss;
}

/// Mean categorical cross-entropy of probability rows against one-hot rows.
template <class Scalar>
LossValue categorical_cross_entropy(const Matrix<Scalar>& pred, const Matrix<Scalar>& onehot) {
  if (pred.rows() != onehot.rows() || pred.cols() != onehot.cols()) {
    fail(ErrorKind::shape, "categorical_cross_entropy: predictions " + shape_string(pred) + " vs labels " +
                               shape_string(onehot));
  }
  if (pred.rows() == 0) fail(ErrorKind::contract, "categorical_cross_entropy: empty batch");
  LossValue loss;
  loss.samples = pred.rows();
  loss.classes = pred.cols();
  loss.per_sample.reserve(static_cast<std::size_t>(pred.rows()));
  double total = 0.0;
  for (Index m = 0; m < pred.rows(); ++m) {
    const double row_sum = pred.row(m).template cast<double>().sum();
    if (std::abs(row_sum - 1.0) > kRowSumTolerance) {
      fail(ErrorKind::validation,
           "categorical_cross_entropy: prediction row " + std::to_string(m) + " sums to " + std::to_string(row_sum));
    }
    double term = 0.0;
    for (Index b = 0; b < pred.cols(); ++b) {
      const double d = static_cast<double>(onehot(m, b));
      if (d != 0.0) term -= d * std::log(clamp_probability(static_cast<double>(pred(m, b))));
    }
    loss.per_sample.push_back(term);
    total += term;
  }
  loss.value = total / static_cast<double>(pred.rows());
  return loss;
}

template <class Scalar>
Matrix<Scalar> one_hot(std::span<const int> labels, Index classes) {
  Matrix<Scalar> out = Matrix<Scalar>::Zero(static_cast<Index>(labels.size()), classes);
  for (std::size_t m = 0; m < labels.size(); ++m) {
    if (labels[m] < 0 || labels[m] >= classes) {
      fail(ErrorKind::validation, "one_hot: label " + std::to_string(labels[m]) + " outside [0, " +
                                      std::to_string(classes) + ")");
    }
    out(static_cast<Index>(m), labels[m]) = Scalar(1);
  }
  return out;
}

}  // namespace hct
