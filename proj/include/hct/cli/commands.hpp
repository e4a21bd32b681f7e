#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hct/cli/run_config.hpp"
#include "hct/dataio/dataset.hpp"

namespace hct::cli {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

struct InputDigest {
  std::string name;  // file name, without the directory
  std::string sha256;
};

/// Parsed corpus directory. Files that fail to parse are listed in
/// `malformed` and skipped.
struct LoadedDataset {
  std::vector<WalkRecord> records;
  std::vector<std::string> malformed;  // "<file>: <reason>"
  std::optional<LabelTable> labels;
  std::filesystem::path label_path;
  std::vector<InputDigest> inputs;
};

// Dataset directory from the config, falling back to $HCT_DATA_DIR.
std::filesystem::path resolve_data_dir(const RunConfig& config);

LoadedDataset load_dataset(const RunConfig& config, bool require_labels);

// Normalized, segmented walks of the subjects the label table knows.
std::vector<PreparedWalk> prepare_walks(const LoadedDataset& data, Index segment_length);

/// Run manifest: command, config echo, seed and SHA-256 of every input.
nlohmann::ordered_json make_manifest(const std::string& command, const RunConfig& config,
                                     const std::vector<InputDigest>& inputs, const std::vector<std::string>& outputs);

struct CheckpointPaths {
  std::filesystem::path binary;
  std::filesystem::path staging;
  std::filesystem::path walk;
};

int cmd_ingest(const RunConfig& config, std::ostream& out);
int cmd_train(const RunConfig& config, bool overwrite, std::ostream& out);
int cmd_cv(const RunConfig& config, bool overwrite, std::ostream& out);
int cmd_diagnose(const RunConfig& config, const CheckpointPaths& paths, std::ostream& out);

/// Exit status for an error category; 0 is success.
int exit_code(ErrorKind kind);

/// Full command line entry point. Errors are reported on `err` as a single
/// `error[<category>]: <message>` line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hct::cli
