#include <gtest/gtest.h>

#include <filesystem>
#include <cstring>
#include <fstream>
#include <functional>
#include <optional>

#include "hct/model/checkpoint.hpp"

using namespace hct;

namespace {

std::optional<ErrorKind> kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("hct_ckpt_" + name);
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
  HctConfig c;
  c.task = Task::multi_class;
  c.dropout = 0.2;
  const auto params = init_params<float>(c, 8);
  const std::string bytes = encode_checkpoint(params);
  EXPECT_EQ(bytes.substr(0, 4), "HCT1");
  const auto back = decode_checkpoint(bytes);
  EXPECT_EQ(back.config, params.config);
  EXPECT_EQ(back.names, params.names);
  EXPECT_EQ(back.dims, params.dims);
  ASSERT_EQ(back.values.size(), params.values.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    ASSERT_EQ(back.values[i].size(), params.values[i].size());
    EXPECT_EQ(std::memcmp(back.values[i].data(), params.values[i].data(), sizeof(float) * params.values[i].size()), 0);
  }
  EXPECT_EQ(encode_checkpoint(back), bytes);
}

TEST(Checkpoint, FileRoundTripAndTaskCheck) {
  const auto path = temp_path("file.hct");
  const auto params = init_params<float>(HctConfig{}, 1);
  save_checkpoint(params, path);
  EXPECT_EQ(load_checkpoint(path, Task::two_class).values, params.values);
  EXPECT_EQ(kind_of([&] { load_checkpoint(path, Task::multi_class); }), ErrorKind::task_mismatch);
  std::filesystem::remove(path);
  EXPECT_EQ(kind_of([&] { load_checkpoint(path); }), ErrorKind::io);
}

TEST(Checkpoint, CorruptInputsAreFormatErrors) {
  const std::string bytes = encode_checkpoint(init_params<float>(HctConfig{}, 1));
  std::string bad_magic = bytes;
  bad_magic.replace(0, 4, "XXXX");
  EXPECT_EQ(kind_of([&] { decode_checkpoint(bad_magic); }), ErrorKind::format);
  std::string bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_EQ(kind_of([&] { decode_checkpoint(bad_version); }), ErrorKind::format);
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_EQ(kind_of([&] { decode_checkpoint(std::string_view(bytes).substr(0, cut)); }), ErrorKind::format) << cut;
  }
  EXPECT_EQ(kind_of([&] { decode_checkpoint(bytes + "x"); }), ErrorKind::format);
}
