#pragma once

#include <string>

#include "hct/numerics/ops.hpp"

// Composite layers built from the tape primitives, plus value-level entry
// points that evaluate a single layer without keeping a tape around.

namespace hct {

enum class Activation { identity, selu, sigmoid, softmax };

template <class Scalar>
Var<Scalar> activate(Var<Scalar> x, Activation act) {
  switch (act) {
    case Activation::identity: return x;
    case Activation::selu: return selu(x);
    case Activation::sigmoid: return sigmoid(x);
    case Activation::softmax: return softmax_rows(x);
  }
  return x;
}

/// act(x * w + b) applied to every row of x; w is [n, m], b is [1, m].
template <class Scalar>
Var<Scalar> dense(Var<Scalar> x, Var<Scalar> w, Var<Scalar> b, Activation act) {
  return activate(affine(x, w, b), act);
}

/// Learnable arrays of one transformer encoder block of width d with a
/// position-wise feed-forward of inner width f.
///
/// There is no key bias: it shifts every score of a query row by the same
/// amount, so softmax cancels it and its gradient is identically zero.
template <class T>
struct EncoderArrays {
  T wq, bq, wk, wv, bv, wo, bo;
  T norm1_gain, norm1_bias;
  T ff1_w, ff1_b, ff2_w, ff2_b;
  T norm2_gain, norm2_bias;
};

template <class Scalar>
using EncoderVars = EncoderArrays<Var<Scalar>>;

template <class Scalar>
using EncoderWeights = EncoderArrays<Matrix<Scalar>>;

template <class Scalar>
Var<Scalar> multi_head_attention(Var<Scalar> x, Index seq_len, Index heads, const EncoderVars<Scalar>& p) {
  const Var<Scalar> q = affine(x, p.wq, p.bq);
  const Var<Scalar> k = matmul(x, p.wk);
  const Var<Scalar> v = affine(x, p.wv, p.bv);
  return affine(attention(q, k, v, seq_len, heads), p.wo, p.bo);
}

/// Post-norm encoder block: attention and feed-forward sub-layers, each with
/// a residual connection followed by layer normalization. When `rng` is
/// given, dropout at `attention_dropout` is applied to the attention output.
template <class Scalar>
Var<Scalar> encoder_block(Var<Scalar> x, Index seq_len, Index heads, const EncoderVars<Scalar>& p,
                          double attention_dropout = 0.0, Rng* rng = nullptr) {
  Var<Scalar> attended = multi_head_attention(x, seq_len, heads, p);
  if (rng != nullptr) attended = dropout(attended, attention_dropout, *rng);
  const Var<Scalar> h = layer_norm(add(x, attended), p.norm1_gain, p.norm1_bias);
  const Var<Scalar> f = affine(selu(affine(h, p.ff1_w, p.ff1_b)), p.ff2_w, p.ff2_b);
  return layer_norm(add(h, f), p.norm2_gain, p.norm2_bias);
}

template <class Scalar>
EncoderVars<Scalar> bind_constant(Tape<Scalar>& tape, const EncoderWeights<Scalar>& w) {
  return EncoderVars<Scalar>{tape.constant(w.wq),         tape.constant(w.bq),         tape.constant(w.wk),
                             tape.constant(w.wv),         tape.constant(w.bv),         tape.constant(w.wo),
                             tape.constant(w.bo),         tape.constant(w.norm1_gain), tape.constant(w.norm1_bias),
                             tape.constant(w.ff1_w),      tape.constant(w.ff1_b),      tape.constant(w.ff2_w),
                             tape.constant(w.ff2_b),      tape.constant(w.norm2_gain), tape.constant(w.norm2_bias)};
}

// Value-level layers. A single sequence is passed as an [L, C] matrix.

template <class Scalar>
Matrix<Scalar> conv1d(const Matrix<Scalar>& input, const Matrix<Scalar>& kernels, const Matrix<Scalar>& bias) {
  Tape<Scalar> tape;
  return conv1d(tape.constant(input), tape.constant(kernels), tape.constant(bias), input.rows()).value();
}

template <class Scalar>
Matrix<Scalar> maxpool1d(const Matrix<Scalar>& input) {
  Tape<Scalar> tape;
  return max_pool(tape.constant(input), input.rows()).value();
}

template <class Scalar>
Matrix<Scalar> dense(const Matrix<Scalar>& input, const Matrix<Scalar>& weights, const Matrix<Scalar>& bias,
                     Activation act) {
  Tape<Scalar> tape;
  return dense(tape.constant(input), tape.constant(weights), tape.constant(bias), act).value();
}

template <class Scalar>
Matrix<Scalar> multi_head_attention(const Matrix<Scalar>& seq, Index heads, const EncoderWeights<Scalar>& w) {
  Tape<Scalar> tape;
  return multi_head_attention(tape.constant(seq), seq.rows(), heads, bind_constant(tape, w)).value();
}

/// Attention probabilities of a single sequence, stacked per head: [heads * L, L].
template <class Scalar>
Matrix<Scalar> attention_weights(const Matrix<Scalar>& seq, Index heads, const EncoderWeights<Scalar>& w) {
  Matrix<Scalar> q = seq * w.wq;
  q.rowwise() += w.bq.row(0);
  Matrix<Scalar> v = seq * w.wv;
  v.rowwise() += w.bv.row(0);
  return detail::attention_forward<Scalar>(q, seq * w.wk, v, seq.rows(), heads).probs;
}

template <class Scalar>
Matrix<Scalar> encoder_block(const Matrix<Scalar>& seq, Index heads, const EncoderWeights<Scalar>& w) {
  Tape<Scalar> tape;
  return encoder_block(tape.constant(seq), seq.rows(), heads, bind_constant(tape, w)).value();
}

template <class Scalar>
Matrix<Scalar> layer_norm(const Matrix<Scalar>& x, const Matrix<Scalar>& gain, const Matrix<Scalar>& bias) {
  Tape<Scalar> tape;
  return layer_norm(tape.constant(x), tape.constant(gain), tape.constant(bias)).value();
}

}  // namespace hct
