#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hct/dataio/segment.hpp"
#include "hct/model/params.hpp"
#include "hct/numerics/layers.hpp"

// Forward pass of the hybrid ConvNet-Transformer. A batch of B segment sets
// enters as a [B * 18 * n, 1] column (sample, then sensor, then time), so the
// 18 branches of every sample run as one batched convolution with the shared
// kernels.

namespace hct {

struct ForwardMode {
  bool training = false;
  Rng* rng = nullptr;  // required when training with dropout
};

/// The arrays of an HctParams recorded on a tape, either as differentiable
/// variables (in parameter order) or as constants.
template <class Scalar>
class BoundParams {
 public:
  BoundParams(Tape<Scalar>& tape, const HctParams<Scalar>& params, bool differentiable)
      : tape_(&tape), params_(&params) {
    vars_.reserve(params.size());
    for (const auto& v : params.values) vars_.push_back(differentiable ? tape.variable(v) : tape.constant(v));
  }

  Var<Scalar> operator[](std::string_view name) const {
    return vars_[static_cast<std::size_t>(params_->index_of(name))];
  }

  EncoderVars<Scalar> encoder(const std::string& prefix) const {
    const auto& p = *this;
    return EncoderVars<Scalar>{p[prefix + ".query.weight"],  p[prefix + ".query.bias"], p[prefix + ".key.weight"],
                               p[prefix + ".value.weight"],  p[prefix + ".value.bias"], p[prefix + ".output.weight"],
                               p[prefix + ".output.bias"],   p[prefix + ".norm1.gain"], p[prefix + ".norm1.bias"],
                               p[prefix + ".ff1.weight"],    p[prefix + ".ff1.bias"],   p[prefix + ".ff2.weight"],
                               p[prefix + ".ff2.bias"],      p[prefix + ".norm2.gain"], p[prefix + ".norm2.bias"]};
  }

  const HctConfig& config() const { return params_->config; }
  Tape<Scalar>& tape() const { return *tape_; }

 private:
  Tape<Scalar>* tape_;
  const HctParams<Scalar>* params_;
  std::vector<Var<Scalar>> vars_;
};

namespace detail {

inline bool dropout_active(const HctConfig& c, const ForwardMode& mode, bool placed) {
  if (!(placed && mode.training && c.dropout > 0.0)) return false;
  if (mode.rng == nullptr) fail(ErrorKind::contract, "training forward pass with dropout needs an rng");
  return true;
}

}  // namespace detail

/// Fixed encoding for `rows` stacked sequences of `seq_len` tokens of width
/// `cols`: token i of each sequence gets i / seq_len (or i in raw mode) added
/// to every feature.
template <class Scalar>
Matrix<Scalar> positional_encoding(Index rows, Index cols, Index seq_len, PositionalMode mode) {
  if (seq_len < 1 || rows % seq_len != 0) {
    fail(ErrorKind::shape, "positional encoding: " + std::to_string(rows) + " rows vs sequence length " +
                               std::to_string(seq_len));
  }
  Matrix<Scalar> p(rows, cols);
  const double scale = mode == PositionalMode::scaled ? 1.0 / static_cast<double>(seq_len) : 1.0;
  for (Index r = 0; r < rows; ++r) p.row(r).setConstant(static_cast<Scalar>(static_cast<double>(r % seq_len) * scale));
  return p;
}

template <class Scalar>
Var<Scalar> add_positional_encoding(Var<Scalar> x, Index seq_len, PositionalMode mode) {
  return add_constant(x, positional_encoding<Scalar>(x.rows(), x.cols(), seq_len, mode));
}

/// Shared convolution branch: [N * n, 1] -> [N * k, 1]. SELU follows every
/// convolution and a width-2 max pool every second one.
template <class Scalar>
Var<Scalar> conv_branch(const BoundParams<Scalar>& p, Var<Scalar> x) {
  const HctConfig& c = p.config();
  if (x.cols() != 1 || x.rows() % c.segment_length != 0) {
    fail(ErrorKind::shape, "conv_branch: input " + shape_string(x.value()) + " is not a stack of " +
                               std::to_string(c.segment_length) + "-sample windows");
  }
  Index len = c.segment_length;
  for (std::size_t i = 0; i < c.conv_channels.size(); ++i) {
    const std::string prefix = "branch.conv" + std::to_string(i + 1);
    x = selu(conv1d(x, p[prefix + ".kernel"], p[prefix + ".bias"], len));
    len -= c.kernel_size - 1;
    if (i % 2 == 1) {
      x = max_pool(x, len);
      len /= 2;
    }
  }
  return x;
}

/// Lifts each of the k scalars to a token of width d_t, runs the temporal
/// encoder across the k positions and projects back: [N * k, 1] -> [N * k, 1].
template <class Scalar>
Var<Scalar> temporal_encode(const BoundParams<Scalar>& p, Var<Scalar> z, const ForwardMode& mode = {}) {
  const HctConfig& c = p.config();
  if (z.cols() != 1 || z.rows() % c.branch_length != 0) {
    fail(ErrorKind::shape, "temporal_encode: input " + shape_string(z.value()) + " is not a stack of " +
                               std::to_string(c.branch_length) + "-element vectors");
  }
  const Var<Scalar> tokens = affine(z, p["temporal.embed.weight"], p["temporal.embed.bias"]);
  const bool drop = detail::dropout_active(c, mode, c.dropout_at.attention);
  const Var<Scalar> encoded =
      encoder_block(tokens, c.branch_length, c.heads, p.encoder("temporal.encoder"), c.dropout, drop ? mode.rng : nullptr);
  return affine(encoded, p["temporal.unembed.weight"], p["temporal.unembed.bias"]);
}

/// Dense k -> l with SELU per sensor vector: [N * k, 1] -> [N, l]. In
/// non-shared mode every sensor position has its own weights.
template <class Scalar>
Var<Scalar> reduce_fc(const BoundParams<Scalar>& p, Var<Scalar> v, const ForwardMode& mode = {}) {
  const HctConfig& c = p.config();
  if (v.cols() != 1 || v.rows() % c.branch_length != 0) {
    fail(ErrorKind::shape, "reduce_fc: input " + shape_string(v.value()) + " is not a stack of " +
                               std::to_string(c.branch_length) + "-element vectors");
  }
  const Var<Scalar> rows = reshape(v, v.rows() / c.branch_length, c.branch_length);
  Var<Scalar> pre = affine(rows, p["reduce.weight"], p["reduce.bias"]);
  if (!c.shared_reduce) pre = select_row_blocks(pre, c.sensors, c.reduced_length);
  Var<Scalar> out = selu(pre);
  if (detail::dropout_active(c, mode, c.dropout_at.reduce)) out = dropout(out, c.dropout, *mode.rng);
  return out;
}

/// Embeds the 18 sensor tokens of each sample to width d_s, adds the sensor
/// index encoding and runs the spatial encoder: [B * 18, l] -> [B * 18, d_s].
template <class Scalar>
Var<Scalar> spatial_encode(const BoundParams<Scalar>& p, Var<Scalar> tokens, const ForwardMode& mode = {}) {
  const HctConfig& c = p.config();
  if (tokens.cols() != c.reduced_length || tokens.rows() % c.sensors != 0) {
    fail(ErrorKind::shape, "spatial_encode: input " + shape_string(tokens.value()) + " is not a stack of " +
                               std::to_string(c.sensors) + " x " + std::to_string(c.reduced_length) + " token sets");
  }
  Var<Scalar> x = affine(tokens, p["spatial.embed.weight"], p["spatial.embed.bias"]);
  x = add_positional_encoding(x, c.sensors, c.positional);
  const bool drop = detail::dropout_active(c, mode, c.dropout_at.attention);
  return encoder_block(x, c.sensors, c.heads, p.encoder("spatial.encoder"), c.dropout, drop ? mode.rng : nullptr);
}

/// Flattened spatial features -> hidden SELU layers -> sigmoid unit or
/// softmax triple: [B * 18, d_s] -> [B, 1 | 3].
template <class Scalar>
Var<Scalar> output_head(const BoundParams<Scalar>& p, Var<Scalar> features, const ForwardMode& mode = {}) {
  const HctConfig& c = p.config();
  Var<Scalar> x = reshape(features, features.rows() / c.sensors, c.sensors * features.cols());
  const bool drop = detail::dropout_active(c, mode, c.dropout_at.head);
  for (std::size_t i = 0; i < c.head_hidden.size(); ++i) {
    const std::string prefix = "head.fc" + std::to_string(i + 1);
    x = dense(x, p[prefix + ".weight"], p[prefix + ".bias"], Activation::selu);
    if (drop) x = dropout(x, c.dropout, *mode.rng);
  }
  return dense(x, p["head.output.weight"], p["head.output.bias"],
               c.task == Task::two_class ? Activation::sigmoid : Activation::softmax);
}

/// Full network on a stacked batch (see stack_segments): [B, 1 | 3].
template <class Scalar>
Var<Scalar> forward(const BoundParams<Scalar>& p, const Matrix<Scalar>& batch, const ForwardMode& mode = {}) {
  const HctConfig& c = p.config();
  const Index per_sample = c.sensors * c.segment_length;
  if (batch.cols() != 1 || batch.rows() == 0 || batch.rows() % per_sample != 0) {
    fail(ErrorKind::shape, "forward: input " + shape_string(batch) + " is not a stack of " + std::to_string(c.sensors) +
                               " x " + std::to_string(c.segment_length) + " segment sets");
  }
  Tape<Scalar>& tape = p.tape();
  Var<Scalar> y = conv_branch(p, tape.constant(batch));
  y = add_positional_encoding(y, c.branch_length, c.positional);
  const Var<Scalar> v = temporal_encode(p, y, mode);
  const Var<Scalar> d = reduce_fc(p, v, mode);
  const Var<Scalar> s = spatial_encode(p, d, mode);
  return output_head(p, s, mode);
}

template <class Scalar>
Matrix<Scalar> stack_segments(std::span<const SegmentSet* const> segments, Index segment_length) {
  Matrix<Scalar> out(static_cast<Index>(segments.size()) * kSensorCount * segment_length, 1);
  Index row = 0;
  for (const SegmentSet* s : segments) {
    if (s->windows.rows() != kSensorCount || s->windows.cols() != segment_length) {
      fail(ErrorKind::shape, "segment set " + shape_string(s->windows) + " does not match [18, " +
                                 std::to_string(segment_length) + "]");
    }
    // Row-major windows are already sensor-major, time-minor.
    out.middleRows(row, s->windows.size()) =
        Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, 1>>(s->windows.data(), s->windows.size()).cast<Scalar>();
    row += s->windows.size();
  }
  return out;
}

template <class Scalar>
Matrix<Scalar> stack_segments(std::span<const SegmentSet> segments, Index segment_length) {
  std::vector<const SegmentSet*> ptrs;
  ptrs.reserve(segments.size());
  for (const auto& s : segments) ptrs.push_back(&s);
  return stack_segments<Scalar>(std::span<const SegmentSet* const>(ptrs), segment_length);
}

/// Inference (no dropout) over any number of segment sets, in chunks.
template <class Scalar>
Matrix<Scalar> predict(const HctParams<Scalar>& params, std::span<const SegmentSet* const> segments,
                       Index chunk = 128) {
  const HctConfig& c = params.config;
  Matrix<Scalar> out(static_cast<Index>(segments.size()), c.output_units());
  for (std::size_t start = 0; start < segments.size(); start += static_cast<std::size_t>(chunk)) {
    const std::size_t count = std::min(segments.size() - start, static_cast<std::size_t>(chunk));
    Tape<Scalar> tape;
    const BoundParams<Scalar> bound(tape, params, false);
    out.middleRows(static_cast<Index>(start), static_cast<Index>(count)) =
        forward(bound, stack_segments<Scalar>(segments.subspan(start, count), c.segment_length)).value();
  }
  return out;
}

template <class Scalar>
Matrix<Scalar> predict(const HctParams<Scalar>& params, std::span<const SegmentSet> segments) {
  std::vector<const SegmentSet*> ptrs;
  for (const auto& s : segments) ptrs.push_back(&s);
  return predict(params, std::span<const SegmentSet* const>(ptrs));
}

// Single-sample value-level stages.

/// One n-sample window ([n, 1]) through the shared branch: [k, 1].
template <class Scalar>
Matrix<Scalar> conv_branch(const HctParams<Scalar>& params, const Matrix<Scalar>& segment) {
  if (segment.rows() != params.config.segment_length || segment.cols() != 1) {
    fail(ErrorKind::shape, "conv_branch: segment " + shape_string(segment) + " is not [" +
                               std::to_string(params.config.segment_length) + ", 1]");
  }
  Tape<Scalar> tape;
  const BoundParams<Scalar> bound(tape, params, false);
  return conv_branch(bound, tape.constant(segment)).value();
}

/// Temporal (one k-vector as [k, 1]) or spatial (18 tokens as [18, d]) encoding.
template <class Scalar>
Matrix<Scalar> add_positional_encoding(const Matrix<Scalar>& x, Index expected_len, PositionalMode mode) {
  if (x.rows() != expected_len) {
    fail(ErrorKind::shape, "positional encoding: expected " + std::to_string(expected_len) + " positions, got " +
                               std::to_string(x.rows()));
  }
  return x + positional_encoding<Scalar>(x.rows(), x.cols(), expected_len, mode);
}

template <class Scalar>
Matrix<Scalar> temporal_encode(const HctParams<Scalar>& params, const Matrix<Scalar>& z) {
  if (z.rows() != params.config.branch_length || z.cols() != 1) {
    fail(ErrorKind::shape, "temporal_encode: input " + shape_string(z) + " is not [" +
                               std::to_string(params.config.branch_length) + ", 1]");
  }
  Tape<Scalar> tape;
  const BoundParams<Scalar> bound(tape, params, false);
  return temporal_encode(bound, tape.constant(z)).value();
}

/// One temporal vector ([k, 1]) at sensor position `sensor`: [1, l].
template <class Scalar>
Matrix<Scalar> reduce_fc(const HctParams<Scalar>& params, const Matrix<Scalar>& v, Index sensor = 0) {
  const HctConfig& c = params.config;
  if (v.rows() != c.branch_length || v.cols() != 1) {
    fail(ErrorKind::shape, "reduce_fc: input " + shape_string(v) + " is not [" + std::to_string(c.branch_length) + ", 1]");
  }
  // Position the vector at its sensor slot so non-shared weights line up.
  Matrix<Scalar> stacked = Matrix<Scalar>::Zero(c.sensors * c.branch_length, 1);
  stacked.middleRows(sensor * c.branch_length, c.branch_length) = v;
  Tape<Scalar> tape;
  const BoundParams<Scalar> bound(tape, params, false);
  return reduce_fc(bound, tape.constant(stacked)).value().row(sensor);
}

/// C as 18 tokens of l features: [18, d_s].
template <class Scalar>
Matrix<Scalar> spatial_encode(const HctParams<Scalar>& params, const Matrix<Scalar>& tokens) {
  const HctConfig& c = params.config;
  if (tokens.rows() != c.sensors || tokens.cols() != c.reduced_length) {
    fail(ErrorKind::shape, "spatial_encode: input " + shape_string(tokens) + " is not [" + std::to_string(c.sensors) +
                               ", " + std::to_string(c.reduced_length) + "]");
  }
  Tape<Scalar> tape;
  const BoundParams<Scalar> bound(tape, params, false);
  return spatial_encode(bound, tape.constant(tokens)).value();
}

/// Per-stage shapes of one forward pass, for auditing the pipeline.
struct ShapeTrace {
  std::vector<std::pair<std::string, std::pair<Index, Index>>> stages;
};

template <class Scalar>
ShapeTrace trace_shapes(const HctParams<Scalar>& params, std::span<const SegmentSet> batch) {
  const HctConfig& c = params.config;
  ShapeTrace trace;
  const auto note = [&](const std::string& name, const Var<Scalar>& v) {
    trace.stages.emplace_back(name, std::make_pair(v.rows(), v.cols()));
  };
  Tape<Scalar> tape;
  const BoundParams<Scalar> p(tape, params, false);
  const Var<Scalar> input = tape.constant(stack_segments<Scalar>(batch, c.segment_length));
  note("input", input);
  const Var<Scalar> y = conv_branch(p, input);
  note("branch", y);
  const Var<Scalar> z = add_positional_encoding(y, c.branch_length, c.positional);
  note("positional", z);
  const Var<Scalar> v = temporal_encode(p, z);
  note("temporal", v);
  const Var<Scalar> d = reduce_fc(p, v);
  note("reduce", d);
  const Var<Scalar> s = spatial_encode(p, d);
  note("spatial", s);
  note("output", output_head(p, s));
  return trace;
}

}  // namespace hct
