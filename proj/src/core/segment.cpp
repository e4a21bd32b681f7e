#include "hct/dataio/segment.hpp"

#include <cmath>

#include "hct/log.hpp"

namespace hct {

std::vector<double> normalize_signal(std::span<const double> signal) {
  if (signal.empty()) fail(ErrorKind::contract, "normalize_signal: empty signal");
  const auto n = static_cast<double>(signal.size());
  double mean = 0.0;
  for (double v : signal) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : signal) var += (v - mean) * (v - mean);
  const double denom = std::sqrt(var / n) + kNormalizeEpsilon;
  std::vector<double> out;
  out.reserve(signal.size());
  for (double v : signal) out.push_back((v - mean) / denom);
  return out;
}

void normalize_walk(WalkRecord& walk) {
  for (Index s = 0; s < walk.signals.rows(); ++s) {
    const auto normalized = normalize_signal(std::span<const double>(walk.signals.row(s).data(),
                                                                     static_cast<std::size_t>(walk.signals.cols())));
    walk.signals.row(s) = Eigen::Map<const RowVector<double>>(normalized.data(), walk.signals.cols());
  }
}

std::vector<SegmentSet> segment_walk(const WalkRecord& walk, Index n) {
  if (n < 1) fail(ErrorKind::config, "segment_walk: segment length must be positive");
  if (walk.signals.rows() != kSensorCount) {
    fail(ErrorKind::shape, "segment_walk: expected 18 signals, got " + std::to_string(walk.signals.rows()));
  }
  const Index count = walk.length() / n;
  if (count == 0) {
    warn("walk " + walk.subject_id + "_" + walk.walk_id + ": " + std::to_string(walk.length()) +
         " samples is shorter than one segment of " + std::to_string(n));
  }
  std::vector<SegmentSet> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index j = 0; j < count; ++j) {
    out.push_back(SegmentSet{walk.signals.middleCols(j * n, n).cast<float>(), j, walk.subject_id, walk.walk_id});
  }
  return out;
}

}  // namespace hct
