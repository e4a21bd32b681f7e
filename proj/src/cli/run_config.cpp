#include "hct/cli/run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace hct::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    fail(ErrorKind::config, "config key '" + std::string(key) + "': cannot parse '" + std::string(value) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  fail(ErrorKind::config, "config key '" + std::string(key) + "': expected a boolean, got '" + std::string(value) + "'");
}

// Shortest text that reads back to the same double.
std::string format_double(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view raw) {
  const std::string value = trim(raw);
  const auto index = [&] { return parse_number<Index>(key, value); };
  const auto real = [&] { return parse_number<double>(key, value); };
  const auto flag = [&] { return parse_bool(key, value); };
  try {
    if (key == "data_dir") data_dir = value;
    else if (key == "labels") labels = value;
    else if (key == "label_id_column") label_columns.subject = value;
    else if (key == "label_group_column") label_columns.group = value;
    else if (key == "label_stage_column") label_columns.stage = value;
    else if (key == "task") task = parse_cv_task(value);
    else if (key == "out") out = value;
    else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
    else if (key == "folds") folds = index();
    else if (key == "jobs") jobs = index();
    else if (key == "segment_length") model.segment_length = index();
    else if (key == "kernel_size") model.kernel_size = index();
    else if (key == "conv_channels") model.conv_channels = parse_index_list(value);
    else if (key == "branch_length") model.branch_length = index();
    else if (key == "temporal_width") model.temporal_width = index();
    else if (key == "reduced_length") model.reduced_length = index();
    else if (key == "spatial_width") model.spatial_width = index();
    else if (key == "heads") model.heads = index();
    else if (key == "ff_multiplier") model.ff_multiplier = index();
    else if (key == "head_hidden") model.head_hidden = parse_index_list(value);
    else if (key == "dropout") model.dropout = real();
    else if (key == "dropout_attention") model.dropout_at.attention = flag();
    else if (key == "dropout_reduce") model.dropout_at.reduce = flag();
    else if (key == "dropout_head") model.dropout_at.head = flag();
    else if (key == "positional") model.positional = parse_positional_mode(value);
    else if (key == "shared_reduce") model.shared_reduce = flag();
    else if (key == "batch_size") train.batch_size = index();
    else if (key == "max_epochs") train.max_epochs = index();
    else if (key == "patience") train.patience = index();
    else if (key == "validation_fraction") train.validation_fraction = real();
    else if (key == "beta1") train.beta1 = real();
    else if (key == "beta2") train.beta2 = real();
    else if (key == "epsilon") train.epsilon = real();
    else if (key == "learning_rate_detection") learning_rate_detection = real();
    else if (key == "learning_rate_staging") learning_rate_staging = real();
    else fail(ErrorKind::config, "unknown config key '" + std::string(key) + "'");
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    fail(ErrorKind::config, "config key '" + std::string(key) + "': " + e.what());
  }
}

std::map<std::string, std::string> RunConfig::to_map() const {
  std::map<std::string, std::string> m;
  m["data_dir"] = data_dir.string();
  m["labels"] = labels.string();
  m["label_id_column"] = label_columns.subject;
  m["label_group_column"] = label_columns.group;
  m["label_stage_column"] = label_columns.stage;
  m["task"] = std::string(to_string(task));
  m["out"] = out.string();
  if (seed) m["seed"] = std::to_string(*seed);
  m["folds"] = std::to_string(folds);
  m["jobs"] = std::to_string(jobs);
  m["segment_length"] = std::to_string(model.segment_length);
  m["kernel_size"] = std::to_string(model.kernel_size);
  m["conv_channels"] = format_index_list(model.conv_channels);
  m["branch_length"] = std::to_string(model.branch_length);
  m["temporal_width"] = std::to_string(model.temporal_width);
  m["reduced_length"] = std::to_string(model.reduced_length);
  m["spatial_width"] = std::to_string(model.spatial_width);
  m["heads"] = std::to_string(model.heads);
  m["ff_multiplier"] = std::to_string(model.ff_multiplier);
  m["head_hidden"] = format_index_list(model.head_hidden);
  m["dropout"] = format_double(model.dropout);
  m["dropout_attention"] = model.dropout_at.attention ? "1" : "0";
  m["dropout_reduce"] = model.dropout_at.reduce ? "1" : "0";
  m["dropout_head"] = model.dropout_at.head ? "1" : "0";
  m["positional"] = std::string(to_string(model.positional));
  m["shared_reduce"] = model.shared_reduce ? "1" : "0";
  m["batch_size"] = std::to_string(train.batch_size);
  m["max_epochs"] = std::to_string(train.max_epochs);
  m["patience"] = std::to_string(train.patience);
  m["validation_fraction"] = format_double(train.validation_fraction);
  m["beta1"] = format_double(train.beta1);
  m["beta2"] = format_double(train.beta2);
  m["epsilon"] = format_double(train.epsilon);
  m["learning_rate_detection"] = format_double(learning_rate_detection);
  m["learning_rate_staging"] = format_double(learning_rate_staging);
  return m;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : to_map()) out += k + " = " + v + "\n";
  return out;
}

RunConfig RunConfig::from_text(std::string_view text) {
  RunConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::config, "config line " + std::to_string(number) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    // Empty values keep the default (the manifest echoes unset paths as "").
    if (!value.empty()) c.set(key, value);
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::config, "cannot read config file " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  const std::string text = buf.str();
  if (trim(text).starts_with('{')) {
    const auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.contains("config") || !j["config"].is_object()) {
      fail(ErrorKind::config, path.string() + ": not a run manifest");
    }
    std::string flat;
    for (const auto& [k, v] : j["config"].items()) flat += k + " = " + v.get<std::string>() + "\n";
    return from_text(flat);
  }
  return from_text(text);
}

std::uint64_t RunConfig::require_seed() const {
  if (!seed) fail(ErrorKind::config, "a seed is required (--seed or 'seed = N' in the config)");
  return *seed;
}

TrainConfig RunConfig::train_config(Task t) const {
  TrainConfig c = train;
  c.learning_rate = t == Task::two_class ? learning_rate_detection : learning_rate_staging;
  c.seed = seed.value_or(0);
  return c;
}

HctConfig RunConfig::model_config(Task t) const {
  HctConfig c = model;
  c.task = t;
  return c;
}

CvOptions RunConfig::cv_options() const {
  CvOptions o;
  o.k = folds;
  o.seed = require_seed();
  const Index hw = std::max<Index>(1, static_cast<Index>(std::thread::hardware_concurrency()));
  o.jobs = jobs > 0 ? jobs : std::min(folds, hw);
  o.detection_train = train_config(Task::two_class);
  o.staging_train = train_config(Task::multi_class);
  o.detection_model = model_config(Task::two_class);
  o.staging_model = model_config(Task::multi_class);
  return o;
}

}  // namespace hct::cli
