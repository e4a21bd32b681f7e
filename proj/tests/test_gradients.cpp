// Every tape primitive against central finite differences in double.

#include <gtest/gtest.h>

#include "hct/numerics/layers.hpp"
#include "support/gradient_oracle.hpp"

using namespace hct;
using hct::testing::compare_gradients;
using hct::testing::random_matrix;

namespace {

constexpr double kTolerance = 1e-6;  // well inside the 1e-3 contract, in double

Rng rng_for(std::uint64_t seed) { return Rng(seed); }

}  // namespace

TEST(PrimitiveGradient, Add) {
  Rng rng = rng_for(1);
  const auto r = compare_gradients({random_matrix(3, 4, rng), random_matrix(3, 4, rng)},
                                   [](auto& v) { return add(v[0], v[1]); });
  EXPECT_LT(r.max_relative_error, kTolerance);
}

TEST(PrimitiveGradient, CwiseProductAndSum) {
  Rng rng = rng_for(2);
  const auto r = compare_gradients({random_matrix(3, 4, rng), random_matrix(3, 4, rng)},
                                   [](auto& v) { return sum(cwise_product(v[0], v[1])); });
  EXPECT_LT(r.max_relative_error, kTolerance);
}

TEST(PrimitiveGradient, Matmul) {
  Rng rng = rng_for(3);
  const auto r = compare_gradients({random_matrix(3, 5, rng), random_matrix(5, 2, rng)},
                                   [](auto& v) { return matmul(v[0], v[1]); });
  EXPECT_LT(r.max_relative_error, kTolerance);
}

TEST(PrimitiveGradient, Affine) {
  Rng rng = rng_for(4);
  const auto r = compare_gradients({random_matrix(4, 3, rng), random_matrix(3, 6, rng), random_matrix(1, 6, rng)},
                                   [](auto& v) { return affine(v[0], v[1], v[2]); });
  EXPECT_LT(r.max_relative_error, kTolerance);
}

TEST(PrimitiveGradient, Selu) {
  Rng rng = rng_for(5);
  const auto r = compare_gradients({random_matrix(5, 5, rng, 3.0)}, [](auto& v) { return selu(v[0]); });
  EXPECT_LT(r.max_relative_error, kTolerance);
}

TEST(PrimitiveGradient, Sigmoid) {
  Rng rng = rng_for(6);
  const auto r = compare_gradients({random_matrix(5, 5, rng, 4.0)}, [](auto& v) { return sigmoid(v[0]); });
  EXPECT_LT(r.max_relative_error, kTolerance);
}

TEST(PrimitiveGradient, Softmax) {
  Rng rng = rng_for(7);
  const auto r = compare_gradients({random_matrix(4, 3, rng, 3.0)}, [](auto& v) { return softmax_rows(v[0]); });
  EXPECT_LT(r.max_relative_error, kTolerance);
}

TEST(PrimitiveGradient, Reshape) {
  Rng rng = rng_for(8);
  const auto r = compare_gradients({random_matrix(6, 4, rng)}, [](auto& v) { return reshape(v[0], 3, 8); });
  EXPECT_LT(r.max_relative_error, kTolerance);
}

TEST(PrimitiveGradient, AddConstant) {
  Rng rng = rng_for(9);
  const MatrixD c = random_matrix(3, 3, rng);
  const auto r = compare_gradients({random_matrix(3, 3, rng)}, [&](auto& v) { return sigmoid(add_constant(v[0], c)); });
  EXPECT_LT(r.max_relative_error, kTolerance);
}

TEST(PrimitiveGradient, Conv1dStackedSequences) {
  Rng rng = rng_for(10);
  // Two sequences of length 7, 2 channels in, 3 out, kernel 3.
  const auto r = compare_gradients({random_matrix(14, 2, rng), random_matrix(6, 3, rng), random_matrix(1, 3, rng)},
                                   [](auto& v) { return conv1d(v[0], v[1], v[2], 7); });
  EXPECT_LT(r.max_relative_error, kTolerance);
}

TEST(PrimitiveGradient, MaxPoolWithOddTail) {
  Rng rng = rng_for(11);
  const auto r = compare_gradients({random_matrix(14, 3, rng)}, [](auto& v) { return max_pool(v[0], 7); });
  EXPECT_LT(r.max_relative_error, kTolerance);
}

TEST(PrimitiveGradient, AttentionCore) {
  Rng rng = rng_for(12);
  const auto r = compare_gradients({random_matrix(10, 4, rng), random_matrix(10, 4, rng), random_matrix(10, 4, rng)},
                                   [](auto& v) { return attention(v[0], v[1], v[2], 5, 2); });
  EXPECT_LT(r.max_relative_error, kTolerance);
}

TEST(PrimitiveGradient, LayerNorm) {
  Rng rng = rng_for(13);
  const auto r = compare_gradients({random_matrix(4, 6, rng, 2.0), random_matrix(1, 6, rng), random_matrix(1, 6, rng)},
                                   [](auto& v) { return layer_norm(v[0], v[1], v[2]); });
  EXPECT_LT(r.max_relative_error, kTolerance);
}

TEST(PrimitiveGradient, DropoutWithFixedMask) {
  Rng rng = rng_for(14);
  const auto r = compare_gradients({random_matrix(6, 6, rng)}, [](auto& v) {
    Rng mask_rng(77);
    return dropout(v[0], 0.4, mask_rng);
  });
  EXPECT_LT(r.max_relative_error, kTolerance);
}

TEST(PrimitiveGradient, SelectRowBlocks) {
  Rng rng = rng_for(15);
  const auto r = compare_gradients({random_matrix(6, 9, rng)}, [](auto& v) { return select_row_blocks(v[0], 3, 3); });
  EXPECT_LT(r.max_relative_error, kTolerance);
}

TEST(PrimitiveGradient, BinaryCrossEntropy) {
  Rng rng = rng_for(16);
  const std::vector<double> labels{1, 0, 0, 1, 1};
  const auto r = compare_gradients({random_matrix(5, 1, rng, 2.0)}, [&](auto& v) {
    return binary_cross_entropy(sigmoid(v[0]), std::span<const double>(labels));
  });
  EXPECT_LT(r.max_relative_error, kTolerance);
}

TEST(PrimitiveGradient, CategoricalCrossEntropy) {
  Rng rng = rng_for(17);
  const std::vector<int> labels{0, 2, 1, 2};
  const MatrixD onehot = one_hot<double>(labels, 3);
  const auto r = compare_gradients({random_matrix(4, 3, rng, 2.0)},
                                   [&](auto& v) { return categorical_cross_entropy(softmax_rows(v[0]), onehot); });
  EXPECT_LT(r.max_relative_error, kTolerance);
}

TEST(PrimitiveGradient, EncoderBlockAllParameters) {
  Rng rng = rng_for(18);
  const Index d = 4;
  std::vector<MatrixD> inputs{random_matrix(6, d, rng)};
  for (const auto& [r, c] : std::vector<std::pair<Index, Index>>{{d, d}, {1, d}, {d, d}, {d, d}, {1, d}, {d, d},
                                                                  {1, d}, {1, d}, {1, d}, {d, 4 * d}, {1, 4 * d},
                                                                  {4 * d, d}, {1, d}, {1, d}, {1, d}}) {
    inputs.push_back(random_matrix(r, c, rng, 0.7));
  }
  const auto r = compare_gradients(inputs, [](auto& v) {
    const EncoderVars<double> p{v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10], v[11], v[12], v[13],
                                v[14], v[15]};
    return encoder_block(v[0], 3, 2, p);
  });
  EXPECT_LT(r.max_relative_error, 1e-5);
}

TEST(PrimitiveGradient, ClampedLossHasZeroGradient) {
  Tape<double> tape;
  MatrixD p(2, 1);
  p << 1.0 - 1e-9, 1e-9;
  const Var<double> x = tape.variable(p);
  const std::vector<double> labels{0, 1};
  const Gradients<double> g = tape.backward(binary_cross_entropy(x, std::span<const double>(labels)));
  EXPECT_TRUE(g[0].isZero());
}

TEST(PrimitiveGradient, OracleCatchesAWrongBackward) {
  Rng rng = rng_for(19);
  const auto r = compare_gradients({random_matrix(3, 3, rng)}, [](auto& v) {
    const Var<double> x = v[0];
    Matrix<double> out = x.value().array().square().matrix();
    // Claims d(x^2)/dx = x instead of 2x.
    return x.tape->record(std::move(out), {x}, [x](Tape<double>& t, const MatrixD& g) {
      t.accumulate(x, g.cwiseProduct(t.value(x)));
    });
  });
  EXPECT_EQ(r.coordinates, 9);
  EXPECT_GT(r.max_relative_error, 0.4);
}
