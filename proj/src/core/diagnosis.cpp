#include "hct/eval/diagnosis.hpp"

#include "hct/model/hct.hpp"
#include "hct/train/trainer.hpp"

namespace hct {

int majority_vote(std::span<const int> votes, int classes) {
  if (votes.empty()) fail(ErrorKind::contract, "majority_vote: no votes");
  if (classes < 1) fail(ErrorKind::contract, "majority_vote: no classes");
  std::vector<Index> tally(static_cast<std::size_t>(classes), 0);
  for (int v : votes) {
    if (v < 0 || v >= classes) fail(ErrorKind::range, "majority_vote: vote " + std::to_string(v) + " out of range");
    ++tally[static_cast<std::size_t>(v)];
  }
  int best = 0;
  for (int c = 1; c < classes; ++c) {
    if (tally[static_cast<std::size_t>(c)] >= tally[static_cast<std::size_t>(best)]) best = c;
  }
  return best;
}

WalkPrediction predict_walk(std::span<const SegmentSet> segments, const HctParams<float>& params) {
  if (segments.empty()) fail(ErrorKind::contract, "predict_walk: no segments");
  const MatrixF scores = predict(params, segments);
  const int classes = params.config.task == Task::two_class ? 2 : 3;
  std::vector<int> votes;
  votes.reserve(segments.size());
  for (Index m = 0; m < scores.rows(); ++m) votes.push_back(segment_class(scores.row(m)));
  WalkPrediction p;
  p.predicted = majority_vote(votes, classes);
  p.tally.assign(static_cast<std::size_t>(classes), 0);
  for (int v : votes) ++p.tally[static_cast<std::size_t>(v)];
  const RowVector<double> mean = scores.cast<double>().colwise().mean();
  p.mean_scores.assign(mean.data(), mean.data() + mean.size());
  p.segments = scores.rows();
  return p;
}

std::string composed_label(int composed_class) {
  switch (composed_class) {
    case 0: return "healthy";
    case 1: return "2";
    case 2: return "2.5";
    case 3: return "3";
    default: fail(ErrorKind::range, "composed class " + std::to_string(composed_class) + " out of range");
  }
}

Diagnosis two_step_diagnose(std::span<const SegmentSet> segments, const HctParams<float>& binary,
                            const HctParams<float>& staging) {
  if (binary.config.task != Task::two_class) {
    fail(ErrorKind::task_mismatch, "binary slot holds a " + std::string(to_string(binary.config.task)) + " model");
  }
  if (staging.config.task != Task::multi_class) {
    fail(ErrorKind::task_mismatch, "staging slot holds a " + std::string(to_string(staging.config.task)) + " model");
  }
  if (!binary.config.same_preprocessing(staging.config)) {
    fail(ErrorKind::contract, "binary and staging checkpoints expect different preprocessing");
  }
  if (segments.empty()) fail(ErrorKind::contract, "no segments");
  Diagnosis d;
  d.detection = predict_walk(segments, binary);
  if (d.detection.predicted == 0) {
    d.composed = 0;
    return d;
  }
  d.staging = predict_walk(segments, staging);
  d.composed = 1 + d.staging->predicted;
  return d;
}

Diagnosis two_step_diagnose(WalkRecord walk, const HctParams<float>& binary, const HctParams<float>& staging) {
  normalize_walk(walk);
  const std::vector<SegmentSet> segments = segment_walk(walk, binary.config.segment_length);
  return two_step_diagnose(std::span<const SegmentSet>(segments), binary, staging);
}

}  // namespace hct
