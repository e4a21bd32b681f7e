#include "hct/dataio/walk.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <regex>

namespace hct {

bool is_staging_stage(double stage) { return stage == 2.0 || stage == 2.5 || stage == 3.0; }

DiagnosisLabel DiagnosisLabel::parkinson(double stage) {
  if (!is_staging_stage(stage)) {
    fail(ErrorKind::validation, "PD stage " + std::to_string(stage) + " is not one of 2, 2.5, 3");
  }
  return {true, stage};
}

int DiagnosisLabel::staging_class() const {
  if (!is_pd) fail(ErrorKind::contract, "control subjects have no staging class");
  if (hy_stage == 2.0) return 0;
  if (hy_stage == 2.5) return 1;
  if (hy_stage == 3.0) return 2;
  fail(ErrorKind::contract, "PD stage " + std::to_string(hy_stage) + " has no staging class");
}

double stage_of_class(int staging_class) {
  static constexpr std::array<double, 3> kStages{2.0, 2.5, 3.0};
  if (staging_class < 0 || staging_class > 2) fail(ErrorKind::range, "staging class out of range");
  return kStages[static_cast<std::size_t>(staging_class)];
}

std::optional<WalkFileName> parse_walk_filename(std::string_view filename) {
  // Directory components are ignored.
  if (const auto slash = filename.find_last_of("/\\"); slash != std::string_view::npos) {
    filename.remove_prefix(slash + 1);
  }
  static const std::regex kPattern(R"(^([A-Za-z]*)(Pt|Co)(\d+)_(\d+)\.txt$)");
  std::cmatch match;
  const std::string name(filename);
  if (!std::regex_match(name.c_str(), match, kPattern)) return std::nullopt;
  WalkFileName out;
  out.subject_id = match[1].str() + match[2].str() + match[3].str();
  out.walk_id = match[4].str();
  out.is_pd_group = match[2].str() == "Pt";
  return out;
}

namespace {

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

WalkRecord parse_walk_file(std::string_view contents, std::string_view filename) {
  const auto name = parse_walk_filename(filename);
  if (!name) fail(ErrorKind::format, std::string(filename) + ": file name does not match <Prefix><Pt|Co><N>_<W>.txt");

  WalkRecord walk;
  walk.subject_id = name->subject_id;
  walk.walk_id = name->walk_id;
  std::vector<std::array<double, kSensorCount>> rows;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (is_blank(line)) continue;

    std::array<double, kWalkFileColumns> values{};
    std::size_t column = 0;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      const std::string_view token = line.substr(i, j - i);
      if (column < values.size()) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v)) {
          fail(ErrorKind::format, std::string(filename) + ":" + std::to_string(line_no) + ": non-numeric token '" +
                                      std::string(token) + "'");
        }
        values[column] = v;
      }
      ++column;
      i = j;
    }
    if (column != kWalkFileColumns) {
      fail(ErrorKind::format, std::string(filename) + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(kWalkFileColumns) + " columns, found " + std::to_string(column));
    }
    if (!walk.time.empty() && !(values[0] > walk.time.back())) {
      fail(ErrorKind::format, std::string(filename) + ":" + std::to_string(line_no) + ": time is not strictly increasing");
    }
    walk.time.push_back(values[0]);
    std::array<double, kSensorCount> forces{};
    std::copy(values.begin() + 1, values.end(), forces.begin());
    rows.push_back(forces);
  }
  if (rows.empty()) fail(ErrorKind::format, std::string(filename) + ": empty walk file");

  walk.signals.resize(kSensorCount, static_cast<Index>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (Index s = 0; s < kSensorCount; ++s) walk.signals(s, static_cast<Index>(t)) = rows[t][static_cast<std::size_t>(s)];
  }
  if (walk.time.size() >= 2) {
    std::vector<double> steps;
    steps.reserve(walk.time.size() - 1);
    for (std::size_t t = 1; t < walk.time.size(); ++t) steps.push_back(walk.time[t] - walk.time[t - 1]);
    std::nth_element(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(steps.size() / 2), steps.end());
    walk.sample_rate = 1.0 / steps[steps.size() / 2];
  }
  return walk;
}

std::string serialize_walk(const WalkRecord& walk) {
  std::string out;
  char buf[32];
  for (Index t = 0; t < walk.length(); ++t) {
    std::snprintf(buf, sizeof buf, "%.6g", walk.time.at(static_cast<std::size_t>(t)));
    out += buf;
    for (Index s = 0; s < kSensorCount; ++s) {
      std::snprintf(buf, sizeof buf, "\t%.6g", walk.signals(s, t));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace hct
