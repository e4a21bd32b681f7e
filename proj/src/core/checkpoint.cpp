#include "hct/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace hct {
namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) fail(ErrorKind::format, "checkpoint: truncated file");
    const std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint32_t u32() {
    const std::string_view b = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[static_cast<std::size_t>(i)]);
    return v;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const HctParams<float>& params) {
  std::string out(kCheckpointMagic);
  put_u32(out, kCheckpointVersion);
  const std::string config = params.config.to_text();
  put_u32(out, static_cast<std::uint32_t>(config.size()));
  out += config;
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    put_u32(out, static_cast<std::uint32_t>(params.names[i].size()));
    out += params.names[i];
    put_u32(out, static_cast<std::uint32_t>(params.dims[i].size()));
    for (Index d : params.dims[i]) put_u32(out, static_cast<std::uint32_t>(d));
    const MatrixF& m = params.values[i];
    for (Index j = 0; j < m.size(); ++j) put_u32(out, std::bit_cast<std::uint32_t>(m.data()[j]));
  }
  return out;
}

HctParams<float> decode_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (bytes.size() < kCheckpointMagic.size() || in.take(kCheckpointMagic.size()) != kCheckpointMagic) {
    fail(ErrorKind::format, "checkpoint: bad magic (expected HCT1)");
  }
  if (const std::uint32_t version = in.u32(); version != kCheckpointVersion) {
    fail(ErrorKind::format, "checkpoint: unsupported version " + std::to_string(version));
  }
  HctParams<float> p;
  p.config = HctConfig::from_text(in.take(in.u32()));
  const auto layout = param_layout(p.config);
  const std::uint32_t count = in.u32();
  if (count != layout.size()) {
    fail(ErrorKind::format, "checkpoint: " + std::to_string(count) + " arrays, config implies " +
                                std::to_string(layout.size()));
  }
  for (const ParamSpec& spec : layout) {
    std::string name(in.take(in.u32()));
    if (name != spec.name) fail(ErrorKind::format, "checkpoint: expected array '" + spec.name + "', found '" + name + "'");
    const std::uint32_t rank = in.u32();
    std::vector<Index> dims;
    for (std::uint32_t r = 0; r < rank; ++r) dims.push_back(static_cast<Index>(in.u32()));
    if (dims != spec.dims) fail(ErrorKind::format, "checkpoint: array '" + name + "' has unexpected dimensions");
    MatrixF m(spec.rows(), spec.cols());
    for (Index j = 0; j < m.size(); ++j) m.data()[j] = std::bit_cast<float>(in.u32());
    require_finite(m, "checkpoint array '" + name + "'");
    p.names.push_back(std::move(name));
    p.dims.push_back(std::move(dims));
    p.values.push_back(std::move(m));
  }
  if (!in.done()) fail(ErrorKind::format, "checkpoint: trailing bytes");
  return p;
}

void save_checkpoint(const HctParams<float>& params, const std::filesystem::path& path) {
  const std::string bytes = encode_checkpoint(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::io, "failed writing checkpoint " + path.string());
}

HctParams<float> load_checkpoint(const std::filesystem::path& path, std::optional<Task> expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot read checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  HctParams<float> p = decode_checkpoint(bytes);
  if (expected && p.config.task != *expected) {
    fail(ErrorKind::task_mismatch, "checkpoint " + path.string() + " holds a " + std::string(to_string(p.config.task)) +
                                       " model, expected " + std::string(to_string(*expected)));
  }
  return p;
}

}  // namespace hct
