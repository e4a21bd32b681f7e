#include <gtest/gtest.h>

#include <cmath>

#include "hct/numerics/nadam.hpp"

using namespace hct;

namespace {

// Scalar reference of the update, written out longhand in double.
struct ScalarNadam {
  double lr, b1, b2, eps;
  double m = 0.0, v = 0.0;
  int t = 0;

  double step(double theta, double g) {
    t += 1;
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double m_hat = m / (1.0 - std::pow(b1, t));
    const double v_hat = v / (1.0 - std::pow(b2, t));
    const double nesterov = b1 * m_hat + (1.0 - b1) * g / (1.0 - std::pow(b1, t));
    return theta - lr * nesterov / (std::sqrt(v_hat) + eps);
  }
};

}  // namespace

TEST(Nadam, ZeroGradientLeavesParametersUnchanged) {
  std::vector<MatrixD> params{MatrixD::Constant(2, 3, 0.7)};
  const std::vector<MatrixD> grads{MatrixD::Zero(2, 3)};
  auto state = make_optimizer_state<double>(params, {});
  nadam_step<double>(params, grads, state);
  EXPECT_TRUE(params[0].isConstant(0.7, 0.0));
  EXPECT_EQ(state.t, 1);
}

TEST(Nadam, SingleStepMatchesScalarReference) {
  std::vector<MatrixD> params{MatrixD::Ones(1, 1)};
  const std::vector<MatrixD> grads{MatrixD::Ones(1, 1)};
  auto state = make_optimizer_state<double>(params, {0.001, 0.9, 0.999, 1e-8});
  nadam_step<double>(params, grads, state);
  ScalarNadam ref{0.001, 0.9, 0.999, 1e-8};
  EXPECT_NEAR(params[0](0, 0), ref.step(1.0, 1.0), 1e-12);
}

TEST(Nadam, QuadraticTrajectoryDecreases) {
  std::vector<MatrixD> params{MatrixD::Ones(1, 1)};
  auto state = make_optimizer_state<double>(params, {0.001, 0.9, 0.999, 1e-8});
  ScalarNadam ref{0.001, 0.9, 0.999, 1e-8};
  double theta = 1.0;
  for (int i = 0; i < 100; ++i) {
    const std::vector<MatrixD> grads{2.0 * params[0]};
    nadam_step<double>(params, grads, state);
    theta = ref.step(theta, 2.0 * theta);
    ASSERT_NEAR(params[0](0, 0), theta, 1e-12);
  }
  EXPECT_LT(std::abs(params[0](0, 0)), 1.0);
  EXPECT_EQ(state.t, 100);
}

TEST(Nadam, BetaOneZeroIsBiasCorrectedRmsProp) {
  std::vector<MatrixD> params{MatrixD::Constant(1, 2, 0.5)};
  auto state = make_optimizer_state<double>(params, {0.01, 0.0, 0.99, 1e-8});
  double theta = 0.5;
  double v = 0.0;
  for (int t = 1; t <= 20; ++t) {
    const double g = std::sin(theta) + 0.1 * t;
    const std::vector<MatrixD> grads{MatrixD::Constant(1, 2, g)};
    nadam_step<double>(params, grads, state);
    v = 0.99 * v + 0.01 * g * g;
    theta -= 0.01 * g / (std::sqrt(v / (1.0 - std::pow(0.99, t))) + 1e-8);
    ASSERT_NEAR(params[0](0, 1), theta, 1e-13);
  }
}

TEST(Nadam, MomentShapesFollowParameters) {
  const std::vector<MatrixD> params{MatrixD::Zero(3, 4), MatrixD::Zero(1, 7)};
  const auto state = make_optimizer_state<double>(params, {});
  ASSERT_EQ(state.m.size(), 2u);
  EXPECT_EQ(state.m[1].cols(), 7);
  EXPECT_EQ(state.v[0].rows(), 3);
  EXPECT_EQ(state.t, 0);
}

TEST(Nadam, ShapeMismatchIsContractError) {
  std::vector<MatrixD> params{MatrixD::Zero(2, 2)};
  auto state = make_optimizer_state<double>(params, {});
  const std::vector<MatrixD> grads{MatrixD::Zero(2, 3)};
  try {
    nadam_step<double>(params, grads, state);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::contract);
  }
  const std::vector<MatrixD> none;
  EXPECT_THROW(nadam_step<double>(params, none, state), Error);
}

TEST(Nadam, RejectsInvalidHyperparameters) {
  const std::vector<MatrixD> params{MatrixD::Zero(1, 1)};
  EXPECT_THROW(make_optimizer_state<double>(params, {0.001, 1.0, 0.999, 1e-8}), Error);
  EXPECT_THROW(make_optimizer_state<double>(params, {0.001, 0.9, 0.0, 1e-8}), Error);
  EXPECT_THROW(make_optimizer_state<double>(params, {0.0, 0.9, 0.999, 1e-8}), Error);
}
