#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "hct/cli/commands.hpp"
#include "hct/log.hpp"

namespace hct::cli {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    fail(ErrorKind::io, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

}  // namespace

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

fs::path resolve_data_dir(const RunConfig& config) {
  if (!config.data_dir.empty()) return config.data_dir;
  if (const char* env = std::getenv("HCT_DATA_DIR"); env != nullptr && *env != '\0') return env;
  fail(ErrorKind::config, "no dataset directory (set data_dir, --data or HCT_DATA_DIR)");
}

LoadedDataset load_dataset(const RunConfig& config, bool require_labels) {
  const fs::path dir = resolve_data_dir(config);
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) fail(ErrorKind::io, "dataset directory " + dir.string() + " is not readable");

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && parse_walk_filename(entry.path().filename().string())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(ErrorKind::io, "no walk files found in " + dir.string());

  LoadedDataset data;
  for (const auto& path : files) {
    const std::string name = path.filename().string();
    const std::string contents = read_file(path);
    try {
      data.records.push_back(parse_walk_file(contents, name));
      data.inputs.push_back({name, sha256_hex(contents)});
    } catch (const Error& e) {
      data.malformed.push_back(name + ": " + e.what());
    }
  }
  for (const auto& m : data.malformed) warn("malformed walk file " + m);
  if (data.records.empty()) fail(ErrorKind::format, "no parsable walk files in " + dir.string());

  fs::path label_path = config.labels;
  if (label_path.empty()) {
    for (const char* candidate : {"demographics.txt", "labels.txt", "labels.tsv", "labels.csv"}) {
      if (fs::is_regular_file(dir / candidate)) {
        label_path = dir / candidate;
        break;
      }
    }
  }
  if (label_path.empty() || !fs::is_regular_file(label_path)) {
    if (require_labels) {
      fail(ErrorKind::config, label_path.empty() ? "no label table (set labels or add demographics.txt)"
                                                 : "label table " + label_path.string() + " not found");
    }
    return data;
  }
  const std::string table = read_file(label_path);
  data.labels = load_labels(table, config.label_columns);
  data.label_path = label_path;
  data.inputs.push_back({label_path.filename().string(), sha256_hex(table)});
  for (const auto& w : data.labels->warnings) warn(w);
  return data;
}

std::vector<PreparedWalk> prepare_walks(const LoadedDataset& data, Index segment_length) {
  if (!data.labels) fail(ErrorKind::config, "walk labels need a label table");
  std::vector<PreparedWalk> walks;
  for (const auto& record : data.records) {
    if (auto p = prepare_walk(record, *data.labels, segment_length)) walks.push_back(std::move(*p));
  }
  return walks;
}

nlohmann::ordered_json make_manifest(const std::string& command, const RunConfig& config,
                                     const std::vector<InputDigest>& inputs, const std::vector<std::string>& outputs) {
  nlohmann::ordered_json j;
  j["tool"] = "hct";
  j["format"] = 1;
  j["command"] = command;
  j["seed"] = config.seed ? nlohmann::ordered_json(*config.seed) : nlohmann::ordered_json();
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config.to_map()) cfg[k] = v;
  j["config"] = cfg;
  auto list = nlohmann::ordered_json::array();
  std::string combined;
  for (const auto& in : inputs) {
    list.push_back({{"file", in.name}, {"sha256", in.sha256}});
    combined += in.name + " " + in.sha256 + "\n";
  }
  j["inputs"] = list;
  j["inputs_sha256"] = sha256_hex(combined);
  j["outputs"] = outputs;
  return j;
}

}  // namespace hct::cli
