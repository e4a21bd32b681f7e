#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "hct/model/params.hpp"

namespace hct {

// Layout (all integers little-endian uint32):
//   "HCT1" | version | config length | config text (HctConfig::to_text)
//   | array count | per array: name length, name, rank, dims..., float32 data
inline constexpr std::string_view kCheckpointMagic = "HCT1";
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const HctParams<float>& params);

/// Rejects a bad magic, an unknown version, truncation, trailing bytes, and
/// arrays that do not match the layout implied by the stored config.
HctParams<float> decode_checkpoint(std::string_view bytes);

void save_checkpoint(const HctParams<float>& params, const std::filesystem::path& path);

/// Loads and, when `expected` is given, rejects a checkpoint trained for the
/// other task.
HctParams<float> load_checkpoint(const std::filesystem::path& path, std::optional<Task> expected = std::nullopt);

}  // namespace hct
