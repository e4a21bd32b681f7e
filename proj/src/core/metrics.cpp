#include "hct/eval/metrics.hpp"

#include <cmath>
#include <sstream>

namespace hct {

ConfusionCounts::ConfusionCounts(std::vector<std::string> labels)
    : labels_(std::move(labels)), cells_(labels_.size() * labels_.size(), 0) {
  if (labels_.size() < 2) fail(ErrorKind::contract, "confusion matrix needs at least two classes");
}

std::int64_t ConfusionCounts::at(Index truth, Index predicted) const {
  if (truth < 0 || truth >= classes() || predicted < 0 || predicted >= classes()) {
    fail(ErrorKind::range, "confusion cell outside the matrix");
  }
  return cells_[static_cast<std::size_t>(truth * classes() + predicted)];
}

void ConfusionCounts::add(int truth, int predicted, std::int64_t count) {
  if (truth < 0 || truth >= classes() || predicted < 0 || predicted >= classes()) {
    fail(ErrorKind::range, "class " + std::to_string(truth) + " / " + std::to_string(predicted) + " outside a " +
                               std::to_string(classes()) + "-class matrix");
  }
  if (count < 0) fail(ErrorKind::contract, "confusion counts must be non-negative");
  cells_[static_cast<std::size_t>(truth * classes() + predicted)] += count;
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) {
  if (labels_ != other.labels_) fail(ErrorKind::contract, "cannot add confusion matrices over different classes");
  for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += other.cells_[i];
  return *this;
}

std::int64_t ConfusionCounts::total() const {
  std::int64_t n = 0;
  for (auto c : cells_) n += c;
  return n;
}

std::int64_t ConfusionCounts::trace() const {
  std::int64_t n = 0;
  for (Index i = 0; i < classes(); ++i) n += at(i, i);
  return n;
}

std::string ConfusionCounts::to_csv() const {
  std::ostringstream out;
  out << "true\\predicted";
  for (const auto& l : labels_) out << ',' << l;
  out << '\n';
  for (Index t = 0; t < classes(); ++t) {
    out << labels_[static_cast<std::size_t>(t)];
    for (Index p = 0; p < classes(); ++p) out << ',' << at(t, p);
    out << '\n';
  }
  return out.str();
}

MetricsReport compute_metrics(const ConfusionCounts& counts) {
  const std::int64_t total = counts.total();
  if (counts.classes() < 2 || total == 0) fail(ErrorKind::contract, "compute_metrics: empty confusion matrix");
  MetricsReport r;
  const auto ratio = [&](std::int64_t num, std::int64_t den, const std::string& name) {
    if (den == 0) {
      r.undefined.push_back(name);
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  r.accuracy = static_cast<double>(counts.trace()) / static_cast<double>(total);
  const Index n = counts.classes();
  for (Index c = 0; c < n; ++c) {
    std::int64_t tp = counts.at(c, c);
    std::int64_t predicted = 0;
    std::int64_t actual = 0;
    for (Index o = 0; o < n; ++o) {
      predicted += counts.at(o, c);
      actual += counts.at(c, o);
    }
    ClassMetrics m;
    m.label = counts.labels()[static_cast<std::size_t>(c)];
    m.support = actual;
    m.precision = ratio(tp, predicted, "precision[" + m.label + "]");
    m.recall = ratio(tp, actual, "recall[" + m.label + "]");
    if (m.precision + m.recall == 0.0) {
      r.undefined.push_back("f1[" + m.label + "]");
    } else {
      m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    }
    r.macro_precision += m.precision / static_cast<double>(n);
    r.macro_recall += m.recall / static_cast<double>(n);
    r.macro_f1 += m.f1 / static_cast<double>(n);
    r.per_class.push_back(std::move(m));
  }
  if (n == 2) {
    const std::int64_t tp = counts.at(1, 1);
    const std::int64_t fn = counts.at(1, 0);
    const std::int64_t tn = counts.at(0, 0);
    const std::int64_t fp = counts.at(0, 1);
    r.sensitivity = ratio(tp, tp + fn, "sensitivity");
    r.specificity = ratio(tn, tn + fp, "specificity");
  }
  return r;
}

nlohmann::ordered_json to_json(const ConfusionCounts& counts) {
  nlohmann::ordered_json j;
  j["labels"] = counts.labels();
  auto rows = nlohmann::ordered_json::array();
  for (Index t = 0; t < counts.classes(); ++t) {
    auto row = nlohmann::ordered_json::array();
    for (Index p = 0; p < counts.classes(); ++p) row.push_back(counts.at(t, p));
    rows.push_back(row);
  }
  j["counts"] = rows;
  return j;
}

nlohmann::ordered_json to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["accuracy"] = report.accuracy;
  if (report.sensitivity) j["sensitivity"] = *report.sensitivity;
  if (report.specificity) j["specificity"] = *report.specificity;
  j["macro_precision"] = report.macro_precision;
  j["macro_recall"] = report.macro_recall;
  j["macro_f1"] = report.macro_f1;
  auto classes = nlohmann::ordered_json::array();
  for (const auto& c : report.per_class) {
    classes.push_back({{"label", c.label}, {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1},
                       {"support", c.support}});
  }
  j["per_class"] = classes;
  j["undefined"] = report.undefined;
  return j;
}

MeanSd mean_sd(std::span<const double> values) {
  if (values.empty()) fail(ErrorKind::contract, "mean_sd: no values");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / n)};
}

}  // namespace hct
