#include "hct/dataio/folds.hpp"

#include <algorithm>
#include <set>

namespace hct {

std::vector<std::string> FoldPlan::subjects_in(Index fold) const {
  if (fold < 0 || fold >= k) fail(ErrorKind::range, "fold " + std::to_string(fold) + " outside [0, " + std::to_string(k) + ")");
  std::vector<std::string> out;
  for (const auto& [subject, f] : fold_of) {
    if (f == fold) out.push_back(subject);
  }
  return out;
}

FoldPlan make_folds(std::span<const SubjectLabel> subjects, Index k, std::uint64_t seed) {
  if (k < 2) fail(ErrorKind::config, "make_folds: k must be at least 2");
  std::vector<std::string> pd;
  std::vector<std::string> control;
  std::set<std::string> seen;
  for (const auto& [subject, label] : subjects) {
    if (!seen.insert(subject).second) fail(ErrorKind::contract, "make_folds: duplicate subject " + subject);
    (label.is_pd ? pd : control).push_back(subject);
  }
  // Input order must not influence the plan.
  std::sort(pd.begin(), pd.end());
  std::sort(control.begin(), control.end());
  for (const auto* stratum : {&pd, &control}) {
    if (!stratum->empty() && static_cast<Index>(stratum->size()) < k) {
      fail(ErrorKind::config, "make_folds: " + std::string(stratum == &pd ? "PD" : "control") + " stratum has " +
                                  std::to_string(stratum->size()) + " subjects, fewer than k = " + std::to_string(k));
    }
  }
  if (pd.empty() && control.empty()) fail(ErrorKind::config, "make_folds: no subjects");

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  Rng rng(seed);
  for (auto* stratum : {&pd, &control}) {
    std::shuffle(stratum->begin(), stratum->end(), rng);
    for (std::size_t i = 0; i < stratum->size(); ++i) {
      plan.fold_of[(*stratum)[i]] = static_cast<Index>(i % static_cast<std::size_t>(k));
    }
  }
  return plan;
}

}  // namespace hct
