#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hct/numerics/types.hpp"

namespace hct {

enum class Task { two_class, multi_class };

// Positional encodings are zero-based indices, scaled by 1/L or left raw.
enum class PositionalMode { scaled, raw };

std::string_view to_string(Task task);
Task parse_task(std::string_view text);
std::string_view to_string(PositionalMode mode);
PositionalMode parse_positional_mode(std::string_view text);

struct DropoutPlacement {
  bool attention = true;  // attention output of both encoder blocks
  bool reduce = true;     // after the 22 -> 10 reduction
  bool head = true;       // after each hidden layer of the output head

  friend bool operator==(const DropoutPlacement&, const DropoutPlacement&) = default;
};

/// Architecture of the hybrid ConvNet-Transformer.
///
/// Each sensor window of `segment_length` samples runs through the shared
/// convolution branch: convolutions of `kernel_size` with `conv_channels`
/// output channels and a width-2 max pool after every second convolution,
/// ending in one channel of `branch_length` samples.
struct HctConfig {
  Index segment_length = 100;
  Index kernel_size = 3;
  std::vector<Index> conv_channels{8, 16, 16, 1};
  Index branch_length = 22;
  Index temporal_width = 16;
  Index reduced_length = 10;
  Index sensors = 18;
  Index spatial_width = 16;
  Index heads = 4;
  Index ff_multiplier = 4;
  std::vector<Index> head_hidden{64, 32};
  double dropout = 0.3;
  DropoutPlacement dropout_at;
  Task task = Task::two_class;
  PositionalMode positional = PositionalMode::scaled;
  bool shared_reduce = true;

  Index output_units() const { return task == Task::two_class ? 1 : 3; }

  // Sequence length entering the branch and after every conv / pool stage:
  // 100, 98, 96, 48, 46, 44, 22 for the defaults.
  std::vector<Index> branch_lengths() const;

  void validate() const;

  // Flat `key = value` lines; from_text accepts what to_text writes.
  std::string to_text() const;
  static HctConfig from_text(std::string_view text);

  // Whether two configs consume identically preprocessed input.
  bool same_preprocessing(const HctConfig& other) const {
    return segment_length == other.segment_length && sensors == other.sensors;
  }

  friend bool operator==(const HctConfig&, const HctConfig&) = default;
};

// Parses a comma separated list of positive integers such as "8,16,16,1".
std::vector<Index> parse_index_list(std::string_view text);
std::string format_index_list(const std::vector<Index>& values);

}  // namespace hct
