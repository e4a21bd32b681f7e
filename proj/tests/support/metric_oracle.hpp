#pragma once

// Rates recomputed straight from (truth, prediction) pairs, without a
// confusion matrix.

#include <utility>
#include <vector>

namespace hct::testing {

struct OracleRates {
  double accuracy = 0.0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  double macro_f1 = 0.0;
};

inline OracleRates oracle_rates(const std::vector<std::pair<int, int>>& pairs, int classes) {
  OracleRates r;
  int correct = 0;
  for (const auto& [t, p] : pairs) correct += t == p ? 1 : 0;
  r.accuracy = pairs.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(pairs.size());
  for (int c = 0; c < classes; ++c) {
    int tp = 0, predicted = 0, actual = 0;
    for (const auto& [t, p] : pairs) {
      tp += (t == c && p == c) ? 1 : 0;
      predicted += p == c ? 1 : 0;
      actual += t == c ? 1 : 0;
    }
    const double precision = predicted == 0 ? 0.0 : static_cast<double>(tp) / predicted;
    const double recall = actual == 0 ? 0.0 : static_cast<double>(tp) / actual;
    const double f1 = precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
    r.precision.push_back(precision);
    r.recall.push_back(recall);
    r.f1.push_back(f1);
    r.macro_f1 += f1 / classes;
  }
  return r;
}

}  // namespace hct::testing
