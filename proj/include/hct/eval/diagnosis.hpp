#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hct/dataio/segment.hpp"
#include "hct/model/params.hpp"

namespace hct {

/// Modal class of the segment votes; ties go to the higher (more severe)
/// class.
int majority_vote(std::span<const int> votes, int classes);

struct WalkPrediction {
  int predicted = 0;
  std::vector<Index> tally;          // votes per class
  std::vector<double> mean_scores;   // mean model output per unit
  Index segments = 0;
};

/// Classifies every segment of one walk and returns the majority vote.
WalkPrediction predict_walk(std::span<const SegmentSet> segments, const HctParams<float>& params);

// Composed classes: 0 healthy, then the stages 2, 2.5 and 3.
inline constexpr int kComposedClasses = 4;
std::string composed_label(int composed_class);

struct Diagnosis {
  int composed = 0;
  WalkPrediction detection;
  std::optional<WalkPrediction> staging;  // empty when the walk was judged healthy

  std::string label() const { return composed_label(composed); }
};

/// Detection first; the staging model only runs on walks voted PD.
Diagnosis two_step_diagnose(std::span<const SegmentSet> segments, const HctParams<float>& binary,
                            const HctParams<float>& staging);

/// Normalizes and segments a raw walk with the binary model's segment length.
Diagnosis two_step_diagnose(WalkRecord walk, const HctParams<float>& binary, const HctParams<float>& staging);

}  // namespace hct
