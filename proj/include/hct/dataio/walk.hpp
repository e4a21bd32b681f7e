#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hct/numerics/types.hpp"

namespace hct {

// 8 sensors under each foot plus the total force under each foot.
inline constexpr Index kSensorCount = 18;
inline constexpr Index kWalkFileColumns = kSensorCount + 1;

struct DiagnosisLabel {
  bool is_pd = false;
  double hy_stage = 0.0;  // 0 for controls; 2, 2.5 or 3 for PD

  static DiagnosisLabel control() { return {false, 0.0}; }
  static DiagnosisLabel parkinson(double stage);

  // 0, 1, 2 for stages 2, 2.5, 3.
  int staging_class() const;

  friend bool operator==(const DiagnosisLabel&, const DiagnosisLabel&) = default;
};

bool is_staging_stage(double stage);
double stage_of_class(int staging_class);

struct WalkRecord {
  std::string subject_id;
  std::string walk_id;
  double sample_rate = 100.0;
  std::vector<double> time;
  MatrixD signals;  // [18, T], one sensor per row, Newtons
  std::optional<DiagnosisLabel> label;

  Index length() const { return signals.cols(); }
};

struct WalkFileName {
  std::string subject_id;  // prefix + group + number, e.g. "GaPt07"
  std::string walk_id;     // e.g. "01"
  bool is_pd_group = false;
};

/// Splits `<Prefix><Pt|Co><Number>_<Walk>.txt`; std::nullopt if the name does
/// not follow the convention.
std::optional<WalkFileName> parse_walk_filename(std::string_view filename);

/// Parses a 19-column walk file (time followed by the 18 force channels).
WalkRecord parse_walk_file(std::string_view contents, std::string_view filename);

/// Inverse of parse_walk_file, tab-delimited, 6 significant digits.
std::string serialize_walk(const WalkRecord& walk);

}  // namespace hct
