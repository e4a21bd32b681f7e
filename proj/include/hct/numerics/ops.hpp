#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hct/numerics/loss.hpp"
#include "hct/numerics/tape.hpp"

// Differentiable primitives recorded on a Tape. Sequence primitives take a
// `seq_len` and treat the rows of their input as N stacked sequences.

namespace hct {

inline constexpr double kSeluLambda = 1.0507009873554805;
inline constexpr double kSeluAlpha = 1.6732632423543772;
inline constexpr double kLayerNormEpsilon = 1e-5;

namespace detail {

inline void require(bool ok, ErrorKind kind, const std::string& message) {
  if (!ok) fail(kind, message);
}

template <class Scalar>
Index sequence_count(const Matrix<Scalar>& x, Index seq_len, const char* op) {
  require(seq_len >= 1 && x.rows() % seq_len == 0, ErrorKind::shape,
          std::string(op) + ": " + std::to_string(x.rows()) + " rows do not split into sequences of " +
              std::to_string(seq_len));
  return x.rows() / seq_len;
}

template <class Scalar>
Scalar sigmoid(Scalar x) {
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

template <class Scalar>
struct AttentionResult {
  Matrix<Scalar> out;
  Matrix<Scalar> probs;  // [N * heads * L, L]; rows of head h of sequence n start at (n * heads + h) * L
};

template <class Scalar>
AttentionResult<Scalar> attention_forward(const Matrix<Scalar>& q, const Matrix<Scalar>& k, const Matrix<Scalar>& v,
                                          Index seq_len, Index heads) {
  const Index d = q.cols();
  require(heads >= 1 && d % heads == 0, ErrorKind::config,
          "attention: width " + std::to_string(d) + " not divisible by " + std::to_string(heads) + " heads");
  require(k.rows() == q.rows() && v.rows() == q.rows() && k.cols() == d && v.cols() == d, ErrorKind::shape,
          "attention: q/k/v shapes differ");
  const Index n_seq = sequence_count(q, seq_len, "attention");
  const Index dh = d / heads;
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(dh));
  AttentionResult<Scalar> r{Matrix<Scalar>(q.rows(), d), Matrix<Scalar>(n_seq * heads * seq_len, seq_len)};
  for (Index n = 0; n < n_seq; ++n) {
    const Index r0 = n * seq_len;
    for (Index h = 0; h < heads; ++h) {
      auto p = r.probs.middleRows((n * heads + h) * seq_len, seq_len);
      p.noalias() = q.block(r0, h * dh, seq_len, dh) * k.block(r0, h * dh, seq_len, dh).transpose();
      p *= scale;
      for (Index i = 0; i < seq_len; ++i) {
        auto row = p.row(i);
        row = (row.array() - row.maxCoeff()).exp();
        row /= row.sum();
      }
      r.out.block(r0, h * dh, seq_len, dh).noalias() = p * v.block(r0, h * dh, seq_len, dh);
    }
  }
  return r;
}

}  // namespace detail

template <class Scalar>
Var<Scalar> add(Var<Scalar> a, Var<Scalar> b) {
  detail::require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::shape,
                  "add: " + shape_string(a.value()) + " vs " + shape_string(b.value()));
  Matrix<Scalar> out = a.value() + b.value();
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

// Adds a fixed (non-differentiable) array of the same shape.
template <class Scalar>
Var<Scalar> add_constant(Var<Scalar> x, const Matrix<Scalar>& c) {
  detail::require(x.rows() == c.rows() && x.cols() == c.cols(), ErrorKind::shape,
                  "add_constant: " + shape_string(x.value()) + " vs " + shape_string(c));
  Matrix<Scalar> out = x.value() + c;
  return x.tape->record(std::move(out), {x}, [x](Tape<Scalar>& t, const Matrix<Scalar>& g) { t.accumulate(x, g); });
}

template <class Scalar>
Var<Scalar> cwise_product(Var<Scalar> a, Var<Scalar> b) {
  detail::require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::shape,
                  "cwise_product: " + shape_string(a.value()) + " vs " + shape_string(b.value()));
  Matrix<Scalar> out = a.value().cwiseProduct(b.value());
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    t.accumulate(a, g.cwiseProduct(t.value(b)));
    t.accumulate(b, g.cwiseProduct(t.value(a)));
  });
}

template <class Scalar>
Var<Scalar> sum(Var<Scalar> x) {
  Matrix<Scalar> out(1, 1);
  out(0, 0) = x.value().sum();
  return x.tape->record(std::move(out), {x}, [x](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    t.accumulate(x, Matrix<Scalar>::Constant(x.rows(), x.cols(), g(0, 0)));
  });
}

template <class Scalar>
Var<Scalar> matmul(Var<Scalar> a, Var<Scalar> b) {
  detail::require(a.cols() == b.rows(), ErrorKind::shape,
                  "matmul: " + shape_string(a.value()) + " x " + shape_string(b.value()));
  Matrix<Scalar> out = a.value() * b.value();
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    if (t.requires_grad(a)) t.accumulate(a, g * t.value(b).transpose());
    if (t.requires_grad(b)) t.accumulate(b, t.value(a).transpose() * g);
  });
}

/// x * w + bias, with the [1, m] bias broadcast over rows.
template <class Scalar>
Var<Scalar> affine(Var<Scalar> x, Var<Scalar> w, Var<Scalar> bias) {
  detail::require(x.cols() == w.rows() && bias.rows() == 1 && bias.cols() == w.cols(), ErrorKind::shape,
                  "affine: input " + shape_string(x.value()) + ", weights " + shape_string(w.value()) + ", bias " +
                      shape_string(bias.value()));
  Matrix<Scalar> out = x.value() * w.value();
  out.rowwise() += bias.value().row(0);
  return x.tape->record(std::move(out), {x, w, bias}, [x, w, bias](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    if (t.requires_grad(x)) t.accumulate(x, g * t.value(w).transpose());
    if (t.requires_grad(w)) t.accumulate(w, t.value(x).transpose() * g);
    t.accumulate(bias, g.colwise().sum());
  });
}

template <class Scalar>
Var<Scalar> selu(Var<Scalar> x) {
  const Scalar lambda = static_cast<Scalar>(kSeluLambda);
  const Scalar la = static_cast<Scalar>(kSeluLambda * kSeluAlpha);
  Matrix<Scalar> out = x.value().unaryExpr([=](Scalar v) { return v > Scalar(0) ? lambda * v : la * (std::exp(v) - Scalar(1)); });
  return x.tape->record(std::move(out), {x}, [x, lambda, la](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    const Matrix<Scalar>& in = t.value(x);
    t.accumulate(x, g.binaryExpr(in, [=](Scalar gi, Scalar v) { return gi * (v > Scalar(0) ? lambda : la * std::exp(v)); }));
  });
}

template <class Scalar>
Var<Scalar> sigmoid(Var<Scalar> x) {
  Matrix<Scalar> out = x.value().unaryExpr([](Scalar v) { return detail::sigmoid(v); });
  Matrix<Scalar> y = out;
  return x.tape->record(std::move(out), {x}, [x, y = std::move(y)](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    t.accumulate(x, g.cwiseProduct(y).cwiseProduct((Scalar(1) - y.array()).matrix()));
  });
}

// Softmax over each row.
template <class Scalar>
Var<Scalar> softmax_rows(Var<Scalar> x) {
  Matrix<Scalar> out = x.value();
  for (Index i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    row = (row.array() - row.maxCoeff()).exp();
    row /= row.sum();
  }
  Matrix<Scalar> y = out;
  return x.tape->record(std::move(out), {x}, [x, y = std::move(y)](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    Matrix<Scalar> dx = g.cwiseProduct(y);
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> dots = dx.rowwise().sum();
    dx -= (y.array().colwise() * dots.array()).matrix();
    t.accumulate(x, dx);
  });
}

// Row-major reinterpretation to [rows, cols].
template <class Scalar>
Var<Scalar> reshape(Var<Scalar> x, Index rows, Index cols) {
  detail::require(rows * cols == x.value().size(), ErrorKind::shape,
                  "reshape: " + shape_string(x.value()) + " to " + shape_string(rows, cols));
  const Index in_rows = x.rows();
  const Index in_cols = x.cols();
  Matrix<Scalar> out = Eigen::Map<const Matrix<Scalar>>(x.value().data(), rows, cols);
  return x.tape->record(std::move(out), {x}, [x, in_rows, in_cols](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    t.accumulate(x, Eigen::Map<const Matrix<Scalar>>(g.data(), in_rows, in_cols));
  });
}

/// Valid, stride-1 convolution of each stacked sequence.
///
/// `kernels` is [K * Cin, Cout], row k * Cin + c holding kernel[k, c, :], so a
/// row of the im2col patch matrix is K consecutive input rows laid end to end.
template <class Scalar>
Var<Scalar> conv1d(Var<Scalar> x, Var<Scalar> kernels, Var<Scalar> bias, Index seq_len) {
  const Matrix<Scalar>& xv = x.value();
  const Index cin = xv.cols();
  const Index n_seq = detail::sequence_count(xv, seq_len, "conv1d");
  detail::require(cin >= 1 && kernels.rows() % cin == 0, ErrorKind::shape,
                  "conv1d: kernel rows " + std::to_string(kernels.rows()) + " do not match " + std::to_string(cin) +
                      " input channels");
  const Index k = kernels.rows() / cin;
  const Index cout = kernels.cols();
  detail::require(bias.rows() == 1 && bias.cols() == cout, ErrorKind::shape, "conv1d: bias shape");
  detail::require(seq_len >= k, ErrorKind::shape,
                  "conv1d: sequence length " + std::to_string(seq_len) + " shorter than kernel " + std::to_string(k));
  const Index out_len = seq_len - k + 1;
  const Index width = k * cin;

  auto im2col = [=](const Matrix<Scalar>& in) {
    Matrix<Scalar> patches(n_seq * out_len, width);
    for (Index n = 0; n < n_seq; ++n) {
      for (Index s = 0; s < out_len; ++s) {
        patches.row(n * out_len + s) = Eigen::Map<const RowVector<Scalar>>(in.data() + (n * seq_len + s) * cin, width);
      }
    }
    return patches;
  };

  Matrix<Scalar> out = im2col(xv) * kernels.value();
  out.rowwise() += bias.value().row(0);
  return x.tape->record(std::move(out), {x, kernels, bias},
                        [=](Tape<Scalar>& t, const Matrix<Scalar>& g) {
                          if (t.requires_grad(kernels)) t.accumulate(kernels, im2col(t.value(x)).transpose() * g);
                          t.accumulate(bias, g.colwise().sum());
                          if (!t.requires_grad(x)) return;
                          const Matrix<Scalar> dpatches = g * t.value(kernels).transpose();
                          Matrix<Scalar> dx = Matrix<Scalar>::Zero(n_seq * seq_len, cin);
                          for (Index n = 0; n < n_seq; ++n) {
                            for (Index s = 0; s < out_len; ++s) {
                              Eigen::Map<RowVector<Scalar>>(dx.data() + (n * seq_len + s) * cin, width) +=
                                  dpatches.row(n * out_len + s);
                            }
                          }
                          t.accumulate(x, dx);
                        });
}

/// Non-overlapping width-2 max pooling of each stacked sequence; an odd
/// trailing row is dropped.
template <class Scalar>
Var<Scalar> max_pool(Var<Scalar> x, Index seq_len) {
  const Matrix<Scalar>& xv = x.value();
  const Index n_seq = detail::sequence_count(xv, seq_len, "max_pool");
  detail::require(seq_len >= 2, ErrorKind::shape, "max_pool: sequence length " + std::to_string(seq_len) + " < 2");
  const Index out_len = seq_len / 2;
  const Index c = xv.cols();
  Matrix<Scalar> out(n_seq * out_len, c);
  std::vector<Index> source(static_cast<std::size_t>(out.size()));
  for (Index n = 0; n < n_seq; ++n) {
    for (Index s = 0; s < out_len; ++s) {
      const Index r0 = n * seq_len + 2 * s;
      for (Index j = 0; j < c; ++j) {
        const bool first = xv(r0, j) >= xv(r0 + 1, j);
        const Index src = first ? r0 : r0 + 1;
        out(n * out_len + s, j) = xv(src, j);
        source[static_cast<std::size_t>((n * out_len + s) * c + j)] = src;
      }
    }
  }
  const Index in_rows = xv.rows();
  return x.tape->record(std::move(out), {x},
                        [x, c, in_rows, source = std::move(source)](Tape<Scalar>& t, const Matrix<Scalar>& g) {
                          Matrix<Scalar> dx = Matrix<Scalar>::Zero(in_rows, c);
                          for (Index r = 0; r < g.rows(); ++r) {
                            for (Index j = 0; j < c; ++j) dx(source[static_cast<std::size_t>(r * c + j)], j) += g(r, j);
                          }
                          t.accumulate(x, dx);
                        });
}

/// Scaled dot-product attention within each stacked sequence, per head.
/// Inputs are already-projected queries, keys and values of width d.
template <class Scalar>
Var<Scalar> attention(Var<Scalar> q, Var<Scalar> k, Var<Scalar> v, Index seq_len, Index heads) {
  auto r = detail::attention_forward(q.value(), k.value(), v.value(), seq_len, heads);
  const Index d = q.cols();
  const Index dh = d / heads;
  const Index n_seq = q.rows() / seq_len;
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(dh));
  return q.tape->record(
      std::move(r.out), {q, k, v},
      [=, probs = std::move(r.probs)](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        const Matrix<Scalar>& qv = t.value(q);
        const Matrix<Scalar>& kv = t.value(k);
        const Matrix<Scalar>& vv = t.value(v);
        Matrix<Scalar> dq = Matrix<Scalar>::Zero(qv.rows(), d);
        Matrix<Scalar> dk = Matrix<Scalar>::Zero(qv.rows(), d);
        Matrix<Scalar> dv = Matrix<Scalar>::Zero(qv.rows(), d);
        Matrix<Scalar> dp(seq_len, seq_len);
        for (Index n = 0; n < n_seq; ++n) {
          const Index r0 = n * seq_len;
          for (Index h = 0; h < heads; ++h) {
            const auto p = probs.middleRows((n * heads + h) * seq_len, seq_len);
            const auto go = g.block(r0, h * dh, seq_len, dh);
            dv.block(r0, h * dh, seq_len, dh).noalias() = p.transpose() * go;
            dp.noalias() = go * vv.block(r0, h * dh, seq_len, dh).transpose();
            const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> dots = dp.cwiseProduct(p).rowwise().sum();
            dp = p.cwiseProduct((dp.array().colwise() - dots.array()).matrix()) * scale;
            dq.block(r0, h * dh, seq_len, dh).noalias() = dp * kv.block(r0, h * dh, seq_len, dh);
            dk.block(r0, h * dh, seq_len, dh).noalias() = dp.transpose() * qv.block(r0, h * dh, seq_len, dh);
          }
        }
        t.accumulate(q, dq);
        t.accumulate(k, dk);
        t.accumulate(v, dv);
      });
}

// Per-row normalization to zero mean and unit (population) variance, then
// elementwise gain and bias.
template <class Scalar>
Var<Scalar> layer_norm(Var<Scalar> x, Var<Scalar> gain, Var<Scalar> bias) {
  const Matrix<Scalar>& xv = x.value();
  const Index d = xv.cols();
  detail::require(gain.rows() == 1 && gain.cols() == d && bias.rows() == 1 && bias.cols() == d, ErrorKind::shape,
                  "layer_norm: affine parameters must be [1, " + std::to_string(d) + "]");
  Matrix<Scalar> normalized(xv.rows(), d);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_std(xv.rows());
  for (Index i = 0; i < xv.rows(); ++i) {
    const Scalar mean = xv.row(i).mean();
    const Scalar var = (xv.row(i).array() - mean).square().mean();
    inv_std(i) = Scalar(1) / std::sqrt(var + static_cast<Scalar>(kLayerNormEpsilon));
    normalized.row(i) = (xv.row(i).array() - mean) * inv_std(i);
  }
  Matrix<Scalar> out = (normalized.array().rowwise() * gain.value().row(0).array()).matrix();
  out.rowwise() += bias.value().row(0);
  return x.tape->record(
      std::move(out), {x, gain, bias},
      [=, normalized = std::move(normalized), inv_std = std::move(inv_std)](Tape<Scalar>& t, const Matrix<Scalar>& g) {
        t.accumulate(gain, g.cwiseProduct(normalized).colwise().sum());
        t.accumulate(bias, g.colwise().sum());
        if (!t.requires_grad(x)) return;
        const Matrix<Scalar> dn = (g.array().rowwise() * t.value(gain).row(0).array()).matrix();
        Matrix<Scalar> dx(dn.rows(), d);
        const Scalar inv_d = Scalar(1) / static_cast<Scalar>(d);
        for (Index i = 0; i < dn.rows(); ++i) {
          const Scalar s1 = dn.row(i).sum();
          const Scalar s2 = dn.row(i).dot(normalized.row(i));
          dx.row(i) = inv_std(i) * (dn.row(i).array() - inv_d * s1 - normalized.row(i).array() * (inv_d * s2));
        }
        t.accumulate(x, dx);
      });
}

/// Inverted dropout: kept units are scaled by 1 / (1 - rate).
template <class Scalar>
Var<Scalar> dropout(Var<Scalar> x, double rate, Rng& rng) {
  detail::require(rate >= 0.0 && rate < 1.0, ErrorKind::config, "dropout: rate must lie in [0, 1)");
  if (rate == 0.0) return x;
  std::bernoulli_distribution keep(1.0 - rate);
  const Scalar scale = static_cast<Scalar>(1.0 / (1.0 - rate));
  Matrix<Scalar> mask(x.rows(), x.cols());
  for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? scale : Scalar(0);
  Matrix<Scalar> out = x.value().cwiseProduct(mask);
  return x.tape->record(std::move(out), {x}, [x, mask = std::move(mask)](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    t.accumulate(x, g.cwiseProduct(mask));
  });
}

/// From x of shape [R, period * width], row r keeps columns
/// [(r % period) * width, (r % period + 1) * width).
template <class Scalar>
Var<Scalar> select_row_blocks(Var<Scalar> x, Index period, Index width) {
  detail::require(period >= 1 && width >= 1 && x.cols() == period * width, ErrorKind::shape,
                  "select_row_blocks: " + std::to_string(x.cols()) + " columns vs " + std::to_string(period) + " blocks of " +
                      std::to_string(width));
  const Matrix<Scalar>& xv = x.value();
  Matrix<Scalar> out(xv.rows(), width);
  for (Index r = 0; r < xv.rows(); ++r) out.row(r) = xv.block(r, (r % period) * width, 1, width);
  const Index rows = xv.rows();
  return x.tape->record(std::move(out), {x}, [=](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    Matrix<Scalar> dx = Matrix<Scalar>::Zero(rows, period * width);
    for (Index r = 0; r < rows; ++r) dx.block(r, (r % period) * width, 1, width) = g.row(r);
    t.accumulate(x, dx);
  });
}

/// Binary cross-entropy of a [M, 1] probability column. The derivative is
/// zero where the clamp is active.
template <class Scalar>
Var<Scalar> binary_cross_entropy(Var<Scalar> pred, std::span<const Scalar> labels) {
  detail::require(pred.cols() == 1, ErrorKind::shape, "binary_cross_entropy: predictions must be one column");
  const Matrix<Scalar>& p = pred.value();
  const LossValue loss = binary_cross_entropy<Scalar>(std::span<const Scalar>(p.data(), static_cast<std::size_t>(p.size())), labels);
  Matrix<Scalar> out(1, 1);
  out(0, 0) = static_cast<Scalar>(loss.value);
  std::vector<Scalar> a(labels.begin(), labels.end());
  return pred.tape->record(std::move(out), {pred}, [pred, a = std::move(a)](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    const Matrix<Scalar>& pv = t.value(pred);
    const double inv_m = 1.0 / static_cast<double>(pv.rows());
    Matrix<Scalar> dp(pv.rows(), 1);
    for (Index m = 0; m < pv.rows(); ++m) {
      const double pm = static_cast<double>(pv(m, 0));
      const double am = static_cast<double>(a[static_cast<std::size_t>(m)]);
      const bool clamped = pm <= kProbabilityClamp || pm >= 1.0 - kProbabilityClamp;
      dp(m, 0) = clamped ? Scalar(0) : static_cast<Scalar>(-(am / pm - (1.0 - am) / (1.0 - pm)) * inv_m);
    }
    t.accumulate(pred, dp * g(0, 0));
  });
}

template <class Scalar>
Var<Scalar> categorical_cross_entropy(Var<Scalar> pred, const Matrix<Scalar>& onehot) {
  const LossValue loss = categorical_cross_entropy<Scalar>(pred.value(), onehot);
  Matrix<Scalar> out(1, 1);
  out(0, 0) = static_cast<Scalar>(loss.value);
  return pred.tape->record(std::move(out), {pred}, [pred, onehot](Tape<Scalar>& t, const Matrix<Scalar>& g) {
    const Matrix<Scalar>& pv = t.value(pred);
    const double inv_m = 1.0 / static_cast<double>(pv.rows());
    Matrix<Scalar> dp = Matrix<Scalar>::Zero(pv.rows(), pv.cols());
    for (Index m = 0; m < pv.rows(); ++m) {
      for (Index b = 0; b < pv.cols(); ++b) {
        const double d = static_cast<double>(onehot(m, b));
        const double p = static_cast<double>(pv(m, b));
        if (d != 0.0 && p > kProbabilityClamp && p < 1.0 - kProbabilityClamp) {
          dp(m, b) = static_cast<Scalar>(-d / p * inv_m);
        }
      }
    }
    t.accumulate(pred, dp * g(0, 0));
  });
}

}  // namespace hct
