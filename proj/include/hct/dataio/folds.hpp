#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hct/dataio/walk.hpp"

namespace hct {

struct FoldPlan {
  Index k = 0;
  std::uint64_t seed = 0;
  std::map<std::string, Index> fold_of;

  std::vector<std::string> subjects_in(Index fold) const;
  bool contains(const std::string& subject_id) const { return fold_of.count(subject_id) != 0; }
};

using SubjectLabel = std::pair<std::string, DiagnosisLabel>;

/// Stratified subject-level folds: the PD and control strata are each
/// shuffled with the seed and dealt round-robin into k folds. Empty strata
/// are allowed; a non-empty stratum smaller than k is a configuration error.
FoldPlan make_folds(std::span<const SubjectLabel> subjects, Index k, std::uint64_t seed);

}  // namespace hct
