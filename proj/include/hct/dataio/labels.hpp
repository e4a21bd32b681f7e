#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hct/dataio/walk.hpp"

namespace hct {

struct LabelColumns {
  std::string subject = "ID";
  std::string group = "Group";
  std::string stage = "HoehnYahr";
};

struct LabelTable {
  std::map<std::string, DiagnosisLabel> labels;
  // PD subjects whose stage is missing or outside {2, 2.5, 3}: usable for
  // detection, excluded from staging.
  std::set<std::string> unstaged_pd;
  std::vector<std::string> warnings;

  // true/false for known subjects, nullopt otherwise.
  std::optional<bool> is_pd(const std::string& subject_id) const;
};

/// Reads a delimited metadata table (tab, comma or runs of spaces, detected
/// from the header line). Controls get stage 0 regardless of the stage cell.
LabelTable load_labels(std::string_view table, const LabelColumns& columns = {});

}  // namespace hct
