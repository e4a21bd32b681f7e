#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hct/dataio/folds.hpp"
#include "hct/dataio/labels.hpp"
#include "hct/dataio/segment.hpp"

namespace hct {

enum class DatasetTask { detection, staging };

/// A normalized, segmented walk with whatever label information exists.
struct PreparedWalk {
  WalkRecord record;
  bool is_pd = false;
  std::optional<double> hy_stage;  // set for controls (0) and stageable PD walks
  std::vector<SegmentSet> segments;

  const std::string& subject_id() const { return record.subject_id; }
  bool stageable() const { return is_pd && hy_stage.has_value(); }
};

struct LabeledSegment {
  SegmentSet segment;
  int label = 0;
  std::string subject_id;
  std::size_t walk_index = 0;
};

struct DatasetSplit {
  std::vector<LabeledSegment> train;
  std::vector<LabeledSegment> test;
  std::vector<std::size_t> train_walks;
  std::vector<std::size_t> test_walks;
};

/// Normalizes and segments a parsed walk and attaches its label. Returns
/// std::nullopt (with a warning) for subjects the table does not know.
std::optional<PreparedWalk> prepare_walk(WalkRecord walk, const LabelTable& labels, Index segment_length);

// Walk-level class for a task: detection 0 = healthy / 1 = PD, staging
// 0 / 1 / 2 = stage 2 / 2.5 / 3; nullopt when the walk does not take part.
std::optional<int> task_label(const PreparedWalk& walk, DatasetTask task);

/// Per-subject labels suitable for make_folds.
std::vector<SubjectLabel> subject_labels(std::span<const PreparedWalk> walks, DatasetTask task);

/// Train/test segments for one fold. Walks of subjects in `fold_index` form
/// the test split; staging keeps stageable PD walks only.
DatasetSplit build_dataset(std::span<const PreparedWalk> walks, const FoldPlan& plan, Index fold_index,
                           DatasetTask task);

/// Every segment of the given walks with its task label.
std::vector<LabeledSegment> labeled_segments(std::span<const PreparedWalk> walks, DatasetTask task);

}  // namespace hct
