#include "hct/model/config.hpp"

#include <charconv>
#include <map>
#include <sstream>

namespace hct {

namespace {

std::string shortest(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

std::string_view to_string(Task task) { return task == Task::two_class ? "two_class" : "multi_class"; }

Task parse_task(std::string_view text) {
  if (text == "two_class") return Task::two_class;
  if (text == "multi_class") return Task::multi_class;
  fail(ErrorKind::config, "unknown model task '" + std::string(text) + "'");
}

std::string_view to_string(PositionalMode mode) { return mode == PositionalMode::scaled ? "scaled" : "raw"; }

PositionalMode parse_positional_mode(std::string_view text) {
  if (text == "scaled") return PositionalMode::scaled;
  if (text == "raw") return PositionalMode::raw;
  fail(ErrorKind::config, "unknown positional mode '" + std::string(text) + "'");
}

std::vector<Index> parse_index_list(std::string_view text) {
  std::vector<Index> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() || v < 1) {
      fail(ErrorKind::config, "expected a list of positive integers, got '" + std::string(text) + "'");
    }
    out.push_back(static_cast<Index>(v));
    start = end + 1;
  }
  return out;
}

std::string format_index_list(const std::vector<Index>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i != 0) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::vector<Index> HctConfig::branch_lengths() const {
  std::vector<Index> lengths{segment_length};
  Index len = segment_length;
  for (std::size_t layer = 0; layer < conv_channels.size(); ++layer) {
    len -= kernel_size - 1;
    if (len < 1) fail(ErrorKind::config, "segment too short for the convolution plan");
    lengths.push_back(len);
    if (layer % 2 == 1) {
      if (len < 2) fail(ErrorKind::config, "segment too short for the pooling plan");
      len /= 2;
      lengths.push_back(len);
    }
  }
  return lengths;
}

void HctConfig::validate() const {
  const auto require = [](bool ok, const std::string& message) {
    if (!ok) fail(ErrorKind::config, message);
  };
  require(sensors == 18, "sensor count must be 18");
  require(segment_length >= 1 && kernel_size >= 1, "segment length and kernel size must be positive");
  require(!conv_channels.empty() && conv_channels.size() % 2 == 0,
          "the convolution plan needs an even number of layers (a pool follows every second layer)");
  require(conv_channels.back() == 1, "the last convolution must have exactly one output channel");
  const Index produced = branch_lengths().back();
  require(produced == branch_length, "convolution branch yields " + std::to_string(produced) +
                                         " samples but branch_length is " + std::to_string(branch_length));
  require(reduced_length >= 1 && reduced_length <= branch_length, "reduced length must lie in [1, branch_length]");
  require(heads >= 1, "heads must be positive");
  require(temporal_width % heads == 0, "temporal width must be divisible by the head count");
  require(spatial_width % heads == 0, "spatial width must be divisible by the head count");
  require(ff_multiplier >= 1, "feed-forward multiplier must be positive");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
}

std::string HctConfig::to_text() const {
  std::ostringstream out;
  out << "task = " << to_string(task) << '\n'
      << "segment_length = " << segment_length << '\n'
      << "kernel_size = " << kernel_size << '\n'
      << "conv_channels = " << format_index_list(conv_channels) << '\n'
      << "branch_length = " << branch_length << '\n'
      << "temporal_width = " << temporal_width << '\n'
      << "reduced_length = " << reduced_length << '\n'
      << "sensors = " << sensors << '\n'
      << "spatial_width = " << spatial_width << '\n'
      << "heads = " << heads << '\n'
      << "ff_multiplier = " << ff_multiplier << '\n'
      << "head_hidden = " << format_index_list(head_hidden) << '\n'
      << "dropout = " << shortest(dropout) << '\n'
      << "dropout_attention = " << dropout_at.attention << '\n'
      << "dropout_reduce = " << dropout_at.reduce << '\n'
      << "dropout_head = " << dropout_at.head << '\n'
      << "positional = " << to_string(positional) << '\n'
      << "shared_reduce = " << shared_reduce << '\n';
  return out.str();
}

HctConfig HctConfig::from_text(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  const auto get = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) fail(ErrorKind::format, std::string("model config: missing key '") + key + "'");
    return it->second;
  };
  const auto index = [&](const char* key) { return static_cast<Index>(std::stoll(get(key))); };
  const auto flag = [&](const char* key) { return get(key) == "1"; };
  HctConfig c;
  try {
    c.task = parse_task(get("task"));
    c.segment_length = index("segment_length");
    c.kernel_size = index("kernel_size");
    c.conv_channels = parse_index_list(get("conv_channels"));
    c.branch_length = index("branch_length");
    c.temporal_width = index("temporal_width");
    c.reduced_length = index("reduced_length");
    c.sensors = index("sensors");
    c.spatial_width = index("spatial_width");
    c.heads = index("heads");
    c.ff_multiplier = index("ff_multiplier");
    c.head_hidden = parse_index_list(get("head_hidden"));
    c.dropout = std::stod(get("dropout"));
    c.dropout_at = {flag("dropout_attention"), flag("dropout_reduce"), flag("dropout_head")};
    c.positional = parse_positional_mode(get("positional"));
    c.shared_reduce = flag("shared_reduce");
  } catch (const std::logic_error& e) {  // stoll / stod
    fail(ErrorKind::format, std::string("model config: ") + e.what());
  }
  return c;
}

}  // namespace hct
