#pragma once

#include <span>
#include <string>
#include <vector>

#include "hct/dataio/walk.hpp"

namespace hct {

inline constexpr double kNormalizeEpsilon = 1e-8;

/// One n-sample window taken at the same time indices from all 18 sensors.
struct SegmentSet {
  MatrixF windows;  // [18, n]
  Index index = 0;  // position of the window within its walk
  std::string subject_id;
  std::string walk_id;

  Index length() const { return windows.cols(); }
};

/// (s - mean) / (population std + 1e-8).
std::vector<double> normalize_signal(std::span<const double> signal);

// Normalizes every sensor row of the walk in place.
void normalize_walk(WalkRecord& walk);

/// Consecutive non-overlapping windows of n samples; a trailing remainder
/// shorter than n is dropped. Walks shorter than n yield no segments and a
/// warning.
std::vector<SegmentSet> segment_walk(const WalkRecord& walk, Index n = 100);

}  // namespace hct
