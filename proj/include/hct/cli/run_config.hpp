#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "hct/dataio/labels.hpp"
#include "hct/eval/cv.hpp"
#include "hct/model/config.hpp"
#include "hct/train/trainer.hpp"

namespace hct::cli {

/// Everything one run depends on. Loaded from a flat `key = value` file (or a
/// previous run's manifest) and then overridden by command-line flags.
struct RunConfig {
  std::filesystem::path data_dir;
  std::filesystem::path labels;  // defaults to demographics.txt or labels.txt in data_dir
  LabelColumns label_columns;
  CvTask task = CvTask::detection;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  Index folds = 10;
  Index jobs = 0;  // 0: one per fold, capped at the hardware thread count
  HctConfig model;
  TrainConfig train;
  double learning_rate_detection = 0.0005;
  double learning_rate_staging = 0.001;

  // Applies one key; unknown keys and unparsable values are config errors.
  void set(std::string_view key, std::string_view value);

  // Sorted `key = value` lines that from_text() reads back unchanged.
  std::string to_text() const;
  std::map<std::string, std::string> to_map() const;

  static RunConfig from_text(std::string_view text);
  // Flat text, or a manifest JSON whose "config" object holds the keys.
  static RunConfig load(const std::filesystem::path& path);

  std::uint64_t require_seed() const;
  TrainConfig train_config(Task task) const;
  HctConfig model_config(Task task) const;
  CvOptions cv_options() const;
};

}  // namespace hct::cli
