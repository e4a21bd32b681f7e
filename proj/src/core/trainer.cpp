#include "hct/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "hct/log.hpp"

namespace hct {

TrainConfig TrainConfig::for_task(Task task) {
  TrainConfig c;
  c.learning_rate = task == Task::two_class ? 0.0005 : 0.001;
  return c;
}

void TrainConfig::validate() const {
  const auto require = [](bool ok, const char* message) {
    if (!ok) fail(ErrorKind::config, message);
  };
  require(batch_size >= 1, "batch_size must be at least 1");
  require(max_epochs >= 1, "max_epochs must be at least 1");
  require(patience >= 1, "patience must be at least 1");
  require(validation_fraction > 0.0 && validation_fraction < 1.0, "validation_fraction must lie in (0, 1)");
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0, "beta1 must lie in [0, 1) and beta2 in (0, 1)");
}

std::string TrainHistory::to_csv() const {
  std::ostringstream out;
  out.precision(9);
  out << "epoch,train_loss,val_loss,val_acc\n";
  for (const auto& e : epochs) out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.val_accuracy << '\n';
  return out.str();
}

bool early_stop(std::span<const double> val_losses, Index patience) {
  if (val_losses.empty()) return false;
  double best = val_losses[0];
  Index since = 0;
  for (std::size_t i = 1; i < val_losses.size(); ++i) {
    if (val_losses[i] < best - kMinImprovement) {
      best = val_losses[i];
      since = 0;
    } else {
      ++since;
    }
  }
  return since >= patience;
}

TrainHistory run_epochs(Index max_epochs, Index patience, const std::function<EpochOutcome(Index)>& run_epoch,
                        const std::function<void(Index)>& on_best) {
  TrainHistory history;
  std::vector<double> val_losses;
  double best = 0.0;
  for (Index epoch = 1; epoch <= max_epochs; ++epoch) {
    const EpochOutcome o = run_epoch(epoch);
    history.epochs.push_back({epoch, o.train_loss, o.val_loss, o.val_accuracy});
    history.stopped_epoch = epoch;
    val_losses.push_back(o.val_loss);
    if (epoch == 1 || o.val_loss < best) {
      best = o.val_loss;
      history.best_epoch = epoch;
      on_best(epoch);
    }
    if (early_stop(val_losses, patience)) {
      history.early_stopped = epoch < max_epochs;
      break;
    }
  }
  return history;
}

ValidationSplit split_validation(std::span<const LabeledSegment> items, double fraction, std::uint64_t seed) {
  std::set<std::string> unique;
  for (const auto& item : items) unique.insert(item.subject_id);
  std::vector<std::string> subjects(unique.begin(), unique.end());
  Rng rng = make_rng(seed, 3);
  std::shuffle(subjects.begin(), subjects.end(), rng);
  std::size_t held = 0;
  if (subjects.size() >= 2) {
    held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(subjects.size())));
    held = std::clamp<std::size_t>(held, 1, subjects.size() - 1);
  }
  const std::set<std::string> validation(subjects.begin(), subjects.begin() + static_cast<std::ptrdiff_t>(held));
  ValidationSplit split;
  for (std::size_t i = 0; i < items.size(); ++i) {
    (validation.count(items[i].subject_id) != 0 ? split.validation : split.train).push_back(i);
  }
  return split;
}

int segment_class(const Eigen::Ref<const RowVector<float>>& scores) {
  if (scores.size() == 1) return scores(0) >= 0.5f ? 1 : 0;
  int best = 0;
  for (Index c = 1; c < scores.size(); ++c) {
    if (scores(c) >= scores(best)) best = static_cast<int>(c);
  }
  return best;
}

EvalResult evaluate_segments(const HctParams<float>& params, std::span<const LabeledSegment> items,
                             std::span<const std::size_t> indices) {
  if (indices.empty()) fail(ErrorKind::contract, "evaluate_segments: no segments");
  std::vector<const SegmentSet*> segments;
  std::vector<int> labels;
  for (std::size_t i : indices) {
    segments.push_back(&items[i].segment);
    labels.push_back(items[i].label);
  }
  const MatrixF scores = predict(params, std::span<const SegmentSet* const>(segments));
  EvalResult r;
  if (params.config.task == Task::two_class) {
    std::vector<float> a(labels.begin(), labels.end());
    r.loss = binary_cross_entropy<float>(std::span<const float>(scores.data(), static_cast<std::size_t>(scores.rows())),
                                         std::span<const float>(a))
                 .value;
  } else {
    r.loss = categorical_cross_entropy<float>(scores, one_hot<float>(labels, 3)).value;
  }
  Index correct = 0;
  for (Index m = 0; m < scores.rows(); ++m) correct += segment_class(scores.row(m)) == labels[static_cast<std::size_t>(m)];
  r.accuracy = static_cast<double>(correct) / static_cast<double>(scores.rows());
  return r;
}

TrainResult train(std::span<const LabeledSegment> items, const TrainConfig& config, const HctConfig& model_config) {
  config.validate();
  model_config.validate();
  if (items.empty()) fail(ErrorKind::contract, "train: no training segments");
  const int classes = static_cast<int>(model_config.task == Task::two_class ? 2 : 3);
  std::set<int> seen;
  for (const auto& item : items) {
    if (item.label < 0 || item.label >= classes) {
      fail(ErrorKind::validation, "train: label " + std::to_string(item.label) + " invalid for a " +
                                      std::string(to_string(model_config.task)) + " model");
    }
    seen.insert(item.label);
  }
  if (seen.size() < 2) warn("train: training set contains a single class");

  const ValidationSplit split = split_validation(items, config.validation_fraction, config.seed);
  const bool has_validation = !split.validation.empty();
  if (!has_validation) warn("train: a single training subject; monitoring training loss instead of validation loss");

  HctParams<float> params = init_params<float>(model_config, config.seed);
  HctParams<float> best = params;
  OptimizerState<float> state = make_optimizer_state<float>(params.values, config.nadam());
  Rng shuffle_rng = make_rng(config.seed, 1);
  Rng dropout_rng = make_rng(config.seed, 2);
  std::vector<std::size_t> order = split.train;

  const auto run_epoch = [&](Index) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t count = std::min(order.size() - start, static_cast<std::size_t>(config.batch_size));
      std::vector<const SegmentSet*> batch;
      std::vector<int> labels;
      for (std::size_t i = start; i < start + count; ++i) {
        batch.push_back(&items[order[i]].segment);
        labels.push_back(items[order[i]].label);
      }
      Tape<float> tape;
      const BoundParams<float> bound(tape, params, true);
      const Var<float> pred = forward(bound, stack_segments<float>(std::span<const SegmentSet* const>(batch),
                                                                   model_config.segment_length),
                                      ForwardMode{true, &dropout_rng});
      const Var<float> loss = task_loss(pred, std::span<const int>(labels), model_config.task);
      const Gradients<float> grads = tape.backward(loss);
      nadam_step<float>(params.values, grads, state);
      loss_sum += static_cast<double>(loss.value()(0, 0)) * static_cast<double>(count);
    }
    EpochOutcome o;
    o.train_loss = loss_sum / static_cast<double>(order.size());
    const EvalResult val = evaluate_segments(params, items, has_validation ? split.validation : split.train);
    o.val_loss = val.loss;
    o.val_accuracy = val.accuracy;
    return o;
  };

  TrainHistory history = run_epochs(config.max_epochs, config.patience, run_epoch, [&](Index) { best = params; });
  return {std::move(best), std::move(history)};
}

}  // namespace hct
