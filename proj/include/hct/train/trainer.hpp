#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hct/dataio/dataset.hpp"
#include "hct/model/hct.hpp"
#include "hct/numerics/nadam.hpp"

namespace hct {

struct TrainConfig {
  Index batch_size = 200;
  Index max_epochs = 25;  // a cap; early stopping may end sooner
  Index patience = 5;
  double learning_rate = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double validation_fraction = 0.1;  // of training subjects
  std::uint64_t seed = 0;

  // Learning rate 0.0005 for detection, 0.001 for staging.
  static TrainConfig for_task(Task task);
  void validate() const;

  NadamHyper nadam() const { return {learning_rate, beta1, beta2, epsilon}; }
};

struct EpochRecord {
  Index epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  Index stopped_epoch = 0;
  Index best_epoch = 0;
  bool early_stopped = false;

  // epoch,train_loss,val_loss,val_acc
  std::string to_csv() const;
};

inline constexpr double kMinImprovement = 1e-6;

/// True iff the last `patience` losses brought no improvement larger than
/// 1e-6 over the best loss seen before them.
bool early_stop(std::span<const double> val_losses, Index patience);

struct EpochOutcome {
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

/// Epoch driver shared by train(): runs up to `max_epochs` epochs, calls
/// `on_best` whenever the validation loss reaches a new minimum and stops once
/// early_stop() fires.
TrainHistory run_epochs(Index max_epochs, Index patience, const std::function<EpochOutcome(Index)>& run_epoch,
                        const std::function<void(Index)>& on_best);

struct ValidationSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Subject-level hold-out of round(fraction * subjects) subjects (at least
/// one, and never all of them). A single subject leaves the validation side
/// empty.
ValidationSplit split_validation(std::span<const LabeledSegment> items, double fraction, std::uint64_t seed);

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Class of one output row: threshold 0.5 for a sigmoid, argmax for softmax
// (ties go to the higher class).
int segment_class(const Eigen::Ref<const RowVector<float>>& scores);

EvalResult evaluate_segments(const HctParams<float>& params, std::span<const LabeledSegment> items,
                             std::span<const std::size_t> indices);

/// Mean task loss (binary or categorical cross-entropy) of a prediction batch.
template <class Scalar>
Var<Scalar> task_loss(Var<Scalar> pred, std::span<const int> labels, Task task) {
  if (task == Task::two_class) {
    std::vector<Scalar> a(labels.begin(), labels.end());
    return binary_cross_entropy(pred, std::span<const Scalar>(a));
  }
  return categorical_cross_entropy(pred, one_hot<Scalar>(labels, 3));
}

struct TrainResult {
  HctParams<float> params;
  TrainHistory history;
};

/// Mini-batch Nadam training with dropout and early stopping; returns the
/// parameters of the epoch with the lowest validation loss.
TrainResult train(std::span<const LabeledSegment> items, const TrainConfig& config, const HctConfig& model_config);

}  // namespace hct
