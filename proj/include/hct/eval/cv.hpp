#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hct/dataio/dataset.hpp"
#include "hct/eval/metrics.hpp"
#include "hct/train/trainer.hpp"

namespace hct {

// detection and staging evaluate one model; two_step trains both per fold and
// scores the composed four-class diagnosis.
enum class CvTask { detection, staging, two_step };

std::string_view to_string(CvTask task);
CvTask parse_cv_task(std::string_view text);

struct CvOptions {
  Index k = 10;
  std::uint64_t seed = 0;
  Index jobs = 1;
  TrainConfig detection_train = TrainConfig::for_task(Task::two_class);
  TrainConfig staging_train = TrainConfig::for_task(Task::multi_class);
  HctConfig detection_model;  // task forced to two_class
  HctConfig staging_model;    // task forced to multi_class
};

struct FoldReport {
  Index fold = 0;
  std::vector<std::size_t> evaluated_walks;
  Index train_walks = 0;
  ConfusionCounts counts;
  std::optional<MetricsReport> metrics;  // empty when no walk could be scored
  // two_step only: the detection model alone and the staging model alone on
  // the staged PD walks.
  std::optional<ConfusionCounts> detection_counts;
  std::optional<ConfusionCounts> staging_counts;
  std::vector<std::pair<std::string, TrainHistory>> histories;
};

struct CvReport {
  CvTask task = CvTask::detection;
  Index k = 0;
  std::uint64_t seed = 0;
  FoldPlan plan;
  std::vector<FoldReport> folds;
  ConfusionCounts pooled;
  MetricsReport pooled_metrics;
  std::optional<ConfusionCounts> pooled_detection;
  std::optional<ConfusionCounts> pooled_staging;
  // metric name -> mean and population SD over the folds that scored walks
  std::map<std::string, MeanSd> aggregate;

  nlohmann::ordered_json to_json() const;
  std::string fold_table_csv() const;
  std::string fold_plan_csv() const;
};

/// Subject-level k-fold cross-validation with walk-level majority-vote
/// scoring. Folds run on up to `jobs` threads; results do not depend on it.
CvReport cross_validate(std::span<const PreparedWalk> walks, CvTask task, const CvOptions& options);

/// Writes aggregate.json, folds.csv, fold_plan.csv and one confusion CSV per
/// fold plus the pooled ones. Returns the written file names.
std::vector<std::string> write_cv_report(const CvReport& report, const std::filesystem::path& dir);

}  // namespace hct
