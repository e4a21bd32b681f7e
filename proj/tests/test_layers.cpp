#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hct/numerics/layers.hpp"
#include "support/gradient_oracle.hpp"

using namespace hct;
using hct::testing::random_matrix;

namespace {

MatrixD column(std::initializer_list<double> v) {
  MatrixD m(static_cast<Index>(v.size()), 1);
  Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

template <class F>
void expect_error(ErrorKind kind, F&& f) {
  try {
    f();
    FAIL() << "expected " << to_string(kind) << " error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

EncoderWeights<double> random_encoder(Index d, Index f, Rng& rng) {
  EncoderWeights<double> w;
  w.wq = random_matrix(d, d, rng, 0.5);
  w.bq = random_matrix(1, d, rng, 0.1);
  w.wk = random_matrix(d, d, rng, 0.5);
  w.wv = random_matrix(d, d, rng, 0.5);
  w.bv = random_matrix(1, d, rng, 0.1);
  w.wo = random_matrix(d, d, rng, 0.5);
  w.bo = random_matrix(1, d, rng, 0.1);
  w.norm1_gain = MatrixD::Ones(1, d);
  w.norm1_bias = MatrixD::Zero(1, d);
  w.ff1_w = random_matrix(d, f, rng, 0.5);
  w.ff1_b = random_matrix(1, f, rng, 0.1);
  w.ff2_w = random_matrix(f, d, rng, 0.5);
  w.ff2_b = random_matrix(1, d, rng, 0.1);
  w.norm2_gain = MatrixD::Ones(1, d);
  w.norm2_bias = MatrixD::Zero(1, d);
  return w;
}

// Plain-loop multi-head attention, written independently of the library.
MatrixD attention_oracle(const MatrixD& x, Index heads, const EncoderWeights<double>& w) {
  const Index L = x.rows();
  const Index d = x.cols();
  const Index dh = d / heads;
  MatrixD q(L, d), k(L, d), v(L, d);
  for (Index i = 0; i < L; ++i) {
    for (Index o = 0; o < d; ++o) {
      double sq = w.bq(0, o), sk = 0.0, sv = w.bv(0, o);
      for (Index c = 0; c < d; ++c) {
        sq += x(i, c) * w.wq(c, o);
        sk += x(i, c) * w.wk(c, o);
        sv += x(i, c) * w.wv(c, o);
      }
      q(i, o) = sq;
      k(i, o) = sk;
      v(i, o) = sv;
    }
  }
  MatrixD concat = MatrixD::Zero(L, d);
  for (Index h = 0; h < heads; ++h) {
    for (Index i = 0; i < L; ++i) {
      std::vector<double> score(static_cast<std::size_t>(L));
      for (Index j = 0; j < L; ++j) {
        double s = 0.0;
        for (Index c = 0; c < dh; ++c) s += q(i, h * dh + c) * k(j, h * dh + c);
        score[static_cast<std::size_t>(j)] = s / std::sqrt(static_cast<double>(dh));
      }
      const double mx = *std::max_element(score.begin(), score.end());
      double z = 0.0;
      for (double& s : score) z += (s = std::exp(s - mx));
      for (Index j = 0; j < L; ++j) {
        for (Index c = 0; c < dh; ++c) concat(i, h * dh + c) += score[static_cast<std::size_t>(j)] / z * v(j, h * dh + c);
      }
    }
  }
  MatrixD out(L, d);
  for (Index i = 0; i < L; ++i) {
    for (Index o = 0; o < d; ++o) {
      double s = w.bo(0, o);
      for (Index c = 0; c < d; ++c) s += concat(i, c) * w.wo(c, o);
      out(i, o) = s;
    }
  }
  return out;
}

MatrixD layer_norm_oracle(const MatrixD& x) {
  MatrixD out(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    double mean = 0.0;
    for (Index j = 0; j < x.cols(); ++j) mean += x(i, j);
    mean /= static_cast<double>(x.cols());
    double var = 0.0;
    for (Index j = 0; j < x.cols(); ++j) var += (x(i, j) - mean) * (x(i, j) - mean);
    var /= static_cast<double>(x.cols());
    for (Index j = 0; j < x.cols(); ++j) out(i, j) = (x(i, j) - mean) / std::sqrt(var + 1e-5);
  }
  return out;
}

}  // namespace

TEST(Conv1d, MovingSumExample) {
  const MatrixD out = conv1d<double>(column({1, 2, 3}), column({1, 1}), MatrixD::Zero(1, 1));
  ASSERT_EQ(out.rows(), 2);
  EXPECT_DOUBLE_EQ(out(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(out(1, 0), 5.0);
}

TEST(Conv1d, LengthHundredKernelThreeGivesNinetyEight) {
  Rng rng(1);
  const MatrixD out = conv1d<double>(random_matrix(100, 1, rng), random_matrix(3, 8, rng), MatrixD::Zero(1, 8));
  EXPECT_EQ(out.rows(), 98);
  EXPECT_EQ(out.cols(), 8);
}

TEST(Conv1d, ZeroKernelGivesBias) {
  Rng rng(2);
  MatrixD bias(1, 2);
  bias << 0.5, -1.25;
  const MatrixD out = conv1d<double>(random_matrix(10, 3, rng), MatrixD::Zero(9, 2), bias);
  for (Index t = 0; t < out.rows(); ++t) {
    EXPECT_DOUBLE_EQ(out(t, 0), 0.5);
    EXPECT_DOUBLE_EQ(out(t, 1), -1.25);
  }
}

TEST(Conv1d, MatchesDefinitionWithSeveralChannels) {
  Rng rng(3);
  const Index L = 9, K = 3, cin = 2, cout = 4;
  const MatrixD x = random_matrix(L, cin, rng);
  const MatrixD kernels = random_matrix(K * cin, cout, rng);
  const MatrixD bias = random_matrix(1, cout, rng);
  const MatrixD out = conv1d<double>(x, kernels, bias);
  for (Index t = 0; t < L - K + 1; ++t) {
    for (Index o = 0; o < cout; ++o) {
      double s = bias(0, o);
      for (Index k = 0; k < K; ++k) {
        for (Index c = 0; c < cin; ++c) s += x(t + k, c) * kernels(k * cin + c, o);
      }
      EXPECT_NEAR(out(t, o), s, 1e-12);
    }
  }
}

TEST(Conv1d, ShapeErrors) {
  expect_error(ErrorKind::shape, [] { conv1d<double>(column({1, 2}), column({1, 1, 1}), MatrixD::Zero(1, 1)); });
  expect_error(ErrorKind::shape,
               [] { conv1d<double>(MatrixD::Ones(5, 2), MatrixD::Ones(3, 1), MatrixD::Zero(1, 1)); });
}

TEST(Conv1d, ShapeAlgebraOverRandomShapes) {
  Rng rng(4);
  std::uniform_int_distribution<Index> dim(1, 6);
  for (int trial = 0; trial < 50; ++trial) {
    const Index K = dim(rng), cin = dim(rng), cout = dim(rng);
    const Index L = K + dim(rng) * 3;
    const MatrixD out = conv1d<double>(random_matrix(L, cin, rng), random_matrix(K * cin, cout, rng),
                                       MatrixD::Zero(1, cout));
    EXPECT_EQ(out.rows(), L - K + 1);
    EXPECT_EQ(out.cols(), cout);
  }
}

TEST(MaxPool, Examples) {
  const MatrixD out = maxpool1d<double>(column({1, 3, 2, 5}));
  ASSERT_EQ(out.rows(), 2);
  EXPECT_EQ(out(0, 0), 3.0);
  EXPECT_EQ(out(1, 0), 5.0);
  expect_error(ErrorKind::shape, [] { maxpool1d<double>(column({7})); });
}

TEST(MaxPool, MonotoneInputKeepsSecondOfEachWindow) {
  MatrixD x(96, 1);
  for (Index i = 0; i < 96; ++i) x(i, 0) = static_cast<double>(i);
  const MatrixD out = maxpool1d<double>(x);
  ASSERT_EQ(out.rows(), 48);
  for (Index i = 0; i < 48; ++i) EXPECT_EQ(out(i, 0), static_cast<double>(2 * i + 1));
}

TEST(MaxPool, OddTailDroppedAndShapeAlgebra) {
  Rng rng(5);
  std::uniform_int_distribution<Index> dim(2, 40);
  for (int trial = 0; trial < 50; ++trial) {
    const Index L = dim(rng), C = dim(rng) % 5 + 1;
    const MatrixD x = random_matrix(L, C, rng);
    const MatrixD out = maxpool1d<double>(x);
    ASSERT_EQ(out.rows(), L / 2);
    ASSERT_EQ(out.cols(), C);
    for (Index t = 0; t < L / 2; ++t) {
      for (Index c = 0; c < C; ++c) EXPECT_EQ(out(t, c), std::max(x(2 * t, c), x(2 * t + 1, c)));
    }
  }
}

TEST(Activations, Examples) {
  MatrixD one(1, 1);
  one << 0.0;
  EXPECT_EQ(dense<double>(one, MatrixD::Ones(1, 1), MatrixD::Zero(1, 1), Activation::selu)(0, 0), 0.0);
  EXPECT_EQ(dense<double>(one, MatrixD::Ones(1, 1), MatrixD::Zero(1, 1), Activation::sigmoid)(0, 0), 0.5);
  for (double c : {-50.0, 0.0, 3.0, 700.0}) {
    const MatrixD s = dense<double>(MatrixD::Zero(1, 1), MatrixD::Zero(1, 3), MatrixD::Constant(1, 3, c),
                                    Activation::softmax);
    for (Index j = 0; j < 3; ++j) EXPECT_NEAR(s(0, j), 1.0 / 3.0, 1e-15);
  }
}

TEST(Activations, RangeProperties) {
  Rng rng(6);
  const MatrixD x = random_matrix(200, 5, rng, 60.0);
  const MatrixD id = MatrixD::Identity(5, 5);
  const MatrixD zero = MatrixD::Zero(1, 5);
  const MatrixD soft = dense<double>(x, id, zero, Activation::softmax);
  for (Index i = 0; i < soft.rows(); ++i) EXPECT_NEAR(soft.row(i).sum(), 1.0, 1e-6);
  const MatrixD sig = dense<float>(x.cast<float>(), id.cast<float>(), zero.cast<float>(), Activation::sigmoid).cast<double>();
  const MatrixD small = random_matrix(200, 5, rng, 10.0);
  const MatrixD sig_small = dense<double>(small, id, zero, Activation::sigmoid);
  EXPECT_GT(sig_small.minCoeff(), 0.0);
  EXPECT_LT(sig_small.maxCoeff(), 1.0);
  EXPECT_GE(sig.minCoeff(), 0.0);
  EXPECT_LE(sig.maxCoeff(), 1.0);
  const MatrixD selu = dense<double>(x, id, zero, Activation::selu);
  EXPECT_GE(selu.minCoeff(), -kSeluLambda * kSeluAlpha);
}

TEST(Dense, ShapeMismatchIsShapeError) {
  expect_error(ErrorKind::shape,
               [] { dense<double>(MatrixD::Ones(1, 3), MatrixD::Ones(2, 2), MatrixD::Zero(1, 2), Activation::identity); });
}

TEST(Attention, ZeroQueryKeyWeightsGiveUniformAttention) {
  Rng rng(7);
  EncoderWeights<double> w = random_encoder(4, 16, rng);
  w.wq.setZero();
  w.bq.setZero();
  w.wk.setZero();
  const MatrixD x = random_matrix(5, 4, rng);
  const MatrixD probs = attention_weights(x, 2, w);
  EXPECT_TRUE(probs.isConstant(1.0 / 5.0, 1e-15));
  MatrixD v = x * w.wv;
  v.rowwise() += w.bv.row(0);
  MatrixD expected_row = v.colwise().mean() * w.wo + w.bo;
  const MatrixD out = multi_head_attention(x, 2, w);
  for (Index i = 0; i < 5; ++i) EXPECT_TRUE(out.row(i).isApprox(expected_row, 1e-12));
}

TEST(Attention, RowsAreDistributions) {
  Rng rng(8);
  const EncoderWeights<double> w = random_encoder(8, 32, rng);
  const MatrixD probs = attention_weights(random_matrix(11, 8, rng, 3.0), 4, w);
  ASSERT_EQ(probs.rows(), 44);
  EXPECT_GE(probs.minCoeff(), 0.0);
  for (Index i = 0; i < probs.rows(); ++i) EXPECT_NEAR(probs.row(i).sum(), 1.0, 1e-12);
}

TEST(Attention, MatchesLoopOracleAndIsPermutationEquivariant) {
  Rng rng(9);
  const EncoderWeights<double> w = random_encoder(4, 16, rng);
  const MatrixD x = random_matrix(3, 4, rng);
  const MatrixD out = multi_head_attention(x, 2, w);
  EXPECT_TRUE(out.isApprox(attention_oracle(x, 2, w), 1e-12));
  std::vector<int> perm{0, 1, 2};
  while (std::next_permutation(perm.begin(), perm.end())) {
    MatrixD px(3, 4);
    for (Index i = 0; i < 3; ++i) px.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    const MatrixD pout = multi_head_attention(px, 2, w);
    for (Index i = 0; i < 3; ++i) EXPECT_TRUE(pout.row(i).isApprox(out.row(perm[static_cast<std::size_t>(i)]), 1e-12));
  }
}

TEST(Attention, WidthNotDivisibleByHeadsIsConfigError) {
  Rng rng(10);
  const EncoderWeights<double> w = random_encoder(6, 24, rng);
  expect_error(ErrorKind::config, [&] { multi_head_attention(random_matrix(3, 6, rng), 4, w); });
}

TEST(EncoderBlock, PreservesShape) {
  Rng rng(11);
  for (Index L : {1, 4, 18, 22}) {
    for (Index d : {4, 8, 16}) {
      const EncoderWeights<double> w = random_encoder(d, 4 * d, rng);
      const MatrixD out = encoder_block(random_matrix(L, d, rng), 4, w);
      EXPECT_EQ(out.rows(), L);
      EXPECT_EQ(out.cols(), d);
    }
  }
}

TEST(EncoderBlock, ZeroValueAndFeedForwardWeightsReduceToDoubleLayerNorm) {
  Rng rng(12);
  EncoderWeights<double> w = random_encoder(4, 16, rng);
  w.wv.setZero();
  w.bv.setZero();
  w.bo.setZero();
  w.ff1_w.setZero();
  w.ff1_b.setZero();
  w.ff2_w.setZero();
  w.ff2_b.setZero();
  const MatrixD x = random_matrix(2, 4, rng, 2.0);
  EXPECT_TRUE(encoder_block(x, 2, w).isApprox(layer_norm_oracle(layer_norm_oracle(x)), 1e-12));
}

TEST(LayerNorm, RowsHaveZeroMeanUnitVariance) {
  Rng rng(13);
  const MatrixD x = random_matrix(20, 16, rng, 5.0);
  const MatrixD y = layer_norm<double>(x, MatrixD::Ones(1, 16), MatrixD::Zero(1, 16));
  for (Index i = 0; i < y.rows(); ++i) {
    EXPECT_NEAR(y.row(i).mean(), 0.0, 1e-12);
    EXPECT_NEAR((y.row(i).array() - y.row(i).mean()).square().mean(), 1.0, 1e-5);
  }
}

TEST(Dropout, InvertedScalingAndRateZeroIdentity) {
  Tape<double> tape;
  Rng rng(14);
  const Var<double> x = tape.constant(MatrixD::Ones(100, 100));
  const Var<double> y = dropout(x, 0.3, rng);
  const MatrixD& v = y.value();
  Index kept = 0;
  for (Index i = 0; i < v.size(); ++i) {
    const double e = v.data()[i];
    EXPECT_TRUE(e == 0.0 || std::abs(e - 1.0 / 0.7) < 1e-12);
    kept += e != 0.0;
  }
  EXPECT_NEAR(static_cast<double>(kept) / 1e4, 0.7, 0.03);
  EXPECT_EQ(dropout(x, 0.0, rng).id, x.id);
  EXPECT_THROW(dropout(x, 1.0, rng), Error);
}

TEST(Determinism, SameInputsGiveBitIdenticalOutputsAndGradients) {
  const auto run = [] {
    Rng rng(15);
    Tape<double> tape;
    const Var<double> x = tape.variable(random_matrix(6, 4, rng));
    const EncoderWeights<double> w = random_encoder(4, 16, rng);
    const Var<double> y = encoder_block(x, 3, 2, bind_constant(tape, w));
    const Var<double> loss = sum(cwise_product(y, y));
    return std::make_pair(y.value(), tape.backward(loss)[0]);
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}
