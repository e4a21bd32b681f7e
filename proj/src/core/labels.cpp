#include "hct/dataio/labels.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "hct/log.hpp"

namespace hct {
namespace {

enum class Delimiter { tab, comma, whitespace };

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view line, Delimiter delim) {
  std::vector<std::string> cells;
  if (delim == Delimiter::whitespace) {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      cells.emplace_back(line.substr(i, j - i));
      i = j;
    }
    return cells;
  }
  const char sep = delim == Delimiter::tab ? '\t' : ',';
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(sep, start);
    cells.emplace_back(trim(line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return cells;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<bool> parse_group(std::string_view cell) {
  const std::string g = lower(trim(cell));
  if (g == "pd" || g == "pt" || g == "parkinson" || g == "parkinsons" || g == "patient") return true;
  if (g == "co" || g == "control" || g == "hc" || g == "healthy") return false;
  return std::nullopt;
}

std::optional<double> parse_stage(std::string_view cell) {
  cell = trim(cell);
  const std::string l = lower(cell);
  if (l.empty() || l == "nan" || l == "na" || l == "n/a" || l == "-") return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (lower(header[i]) == lower(name)) return i;
  }
  fail(ErrorKind::format, "label table: missing column '" + name + "'");
}

}  // namespace

std::optional<bool> LabelTable::is_pd(const std::string& subject_id) const {
  if (const auto it = labels.find(subject_id); it != labels.end()) return it->second.is_pd;
  if (unstaged_pd.count(subject_id) != 0) return true;
  return std::nullopt;
}

LabelTable load_labels(std::string_view table, const LabelColumns& columns) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < table.size()) {
    std::size_t end = table.find('\n', pos);
    if (end == std::string_view::npos) end = table.size();
    std::string_view line = table.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!trim(line).empty()) lines.push_back(line);
    pos = end + 1;
  }
  if (lines.empty()) fail(ErrorKind::format, "label table: no header row");

  const Delimiter delim = lines[0].find('\t') != std::string_view::npos   ? Delimiter::tab
                          : lines[0].find(',') != std::string_view::npos ? Delimiter::comma
                                                                         : Delimiter::whitespace;
  const auto header = split(lines[0], delim);
  const std::size_t subject_col = column_index(header, columns.subject);
  const std::size_t group_col = column_index(header, columns.group);
  const std::size_t stage_col = column_index(header, columns.stage);

  LabelTable out;
  std::set<std::string> seen;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split(lines[r], delim);
    const std::string where = "label table row " + std::to_string(r + 1);
    const auto cell = [&](std::size_t c) -> std::string_view {
      return c < cells.size() ? std::string_view(cells[c]) : std::string_view();
    };
    const std::string subject(trim(cell(subject_col)));
    if (subject.empty()) fail(ErrorKind::format, where + ": empty subject id");
    if (!seen.insert(subject).second) fail(ErrorKind::format, where + ": duplicate subject id '" + subject + "'");
    const auto group = parse_group(cell(group_col));
    if (!group) fail(ErrorKind::format, where + ": unrecognized group '" + std::string(cell(group_col)) + "'");
    if (!*group) {
      out.labels.emplace(subject, DiagnosisLabel::control());
      continue;
    }
    const auto stage = parse_stage(cell(stage_col));
    if (stage && is_staging_stage(*stage)) {
      out.labels.emplace(subject, DiagnosisLabel::parkinson(*stage));
      continue;
    }
    out.unstaged_pd.insert(subject);
    const std::string message = "subject " + subject + ": H&Y stage '" + std::string(trim(cell(stage_col))) +
                                "' is not one of 2, 2.5, 3; excluded from staging";
    out.warnings.push_back(message);
    warn(message);
  }
  return out;
}

}  // namespace hct
