#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hct/numerics/types.hpp"

namespace hct {

/// Square count matrix indexed by (true class, predicted class). For the
/// binary case class 1 (PD) is the positive class.
class ConfusionCounts {
 public:
  ConfusionCounts() = default;
  explicit ConfusionCounts(std::vector<std::string> labels);

  static ConfusionCounts binary() { return ConfusionCounts({"healthy", "PD"}); }
  static ConfusionCounts staging() { return ConfusionCounts({"2", "2.5", "3"}); }
  static ConfusionCounts four_class() { return ConfusionCounts({"healthy", "2", "2.5", "3"}); }

  Index classes() const { return static_cast<Index>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }

  std::int64_t at(Index truth, Index predicted) const;
  void add(int truth, int predicted, std::int64_t count = 1);
  ConfusionCounts& operator+=(const ConfusionCounts& other);

  std::int64_t total() const;
  std::int64_t trace() const;

  // Header row of predicted labels, one row per true label.
  std::string to_csv() const;

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;

 private:
  std::vector<std::string> labels_;
  std::vector<std::int64_t> cells_;
};

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
};

/// Rates derived from a confusion matrix. A rate whose denominator is zero is
/// reported as 0 and named in `undefined`.
struct MetricsReport {
  double accuracy = 0.0;
  std::optional<double> sensitivity;  // binary only
  std::optional<double> specificity;  // binary only
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::vector<std::string> undefined;
};

MetricsReport compute_metrics(const ConfusionCounts& counts);

nlohmann::ordered_json to_json(const ConfusionCounts& counts);
nlohmann::ordered_json to_json(const MetricsReport& report);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // population standard deviation
};

MeanSd mean_sd(std::span<const double> values);

}  // namespace hct
