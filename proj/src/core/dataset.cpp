#include "hct/dataio/dataset.hpp"

#include <map>

#include "hct/log.hpp"

namespace hct {

std::optional<PreparedWalk> prepare_walk(WalkRecord walk, const LabelTable& labels, Index segment_length) {
  PreparedWalk out;
  if (const auto it = labels.labels.find(walk.subject_id); it != labels.labels.end()) {
    out.is_pd = it->second.is_pd;
    out.hy_stage = it->second.hy_stage;
    walk.label = it->second;
  } else if (labels.unstaged_pd.count(walk.subject_id) != 0) {
    out.is_pd = true;
  } else {
    warn("walk " + walk.subject_id + "_" + walk.walk_id + ": subject not in label table; skipped");
    return std::nullopt;
  }
  normalize_walk(walk);
  out.segments = segment_walk(walk, segment_length);
  out.record = std::move(walk);
  return out;
}

std::optional<int> task_label(const PreparedWalk& walk, DatasetTask task) {
  if (task == DatasetTask::detection) return walk.is_pd ? 1 : 0;
  if (!walk.stageable()) return std::nullopt;
  return DiagnosisLabel::parkinson(*walk.hy_stage).staging_class();
}

std::vector<SubjectLabel> subject_labels(std::span<const PreparedWalk> walks, DatasetTask task) {
  std::map<std::string, DiagnosisLabel> subjects;
  for (const auto& w : walks) {
    if (!task_label(w, task)) continue;
    // Unstaged PD subjects carry stage 0 here; folds only read is_pd.
    subjects.emplace(w.subject_id(), DiagnosisLabel{w.is_pd, w.hy_stage.value_or(0.0)});
  }
  return {subjects.begin(), subjects.end()};
}

DatasetSplit build_dataset(std::span<const PreparedWalk> walks, const FoldPlan& plan, Index fold_index,
                           DatasetTask task) {
  if (fold_index < 0 || fold_index >= plan.k) {
    fail(ErrorKind::range, "build_dataset: fold " + std::to_string(fold_index) + " outside [0, " +
                               std::to_string(plan.k) + ")");
  }
  DatasetSplit split;
  for (std::size_t w = 0; w < walks.size(); ++w) {
    const PreparedWalk& walk = walks[w];
    const auto label = task_label(walk, task);
    if (!label) continue;
    const auto it = plan.fold_of.find(walk.subject_id());
    if (it == plan.fold_of.end()) continue;
    const bool is_test = it->second == fold_index;
    (is_test ? split.test_walks : split.train_walks).push_back(w);
    auto& items = is_test ? split.test : split.train;
    for (const auto& seg : walk.segments) items.push_back(LabeledSegment{seg, *label, walk.subject_id(), w});
  }
  return split;
}

std::vector<LabeledSegment> labeled_segments(std::span<const PreparedWalk> walks, DatasetTask task) {
  std::vector<LabeledSegment> out;
  for (std::size_t w = 0; w < walks.size(); ++w) {
    const auto label = task_label(walks[w], task);
    if (!label) continue;
    for (const auto& seg : walks[w].segments) out.push_back(LabeledSegment{seg, *label, walks[w].subject_id(), w});
  }
  return out;
}

}  // namespace hct
