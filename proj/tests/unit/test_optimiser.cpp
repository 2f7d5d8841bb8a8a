#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "dmn/optimiser.h"

using namespace dmn;
using ad::Tensor;

namespace {

Tensor with_grad(std::vector<double> values, const std::vector<double>& grad) {
  const std::size_t n = values.size();
  Tensor t = Tensor::from({n}, std::move(values), true);
  auto buf = t.grad_buffer();
  std::copy(grad.begin(), grad.end(), buf.begin());
  return t;
}

}  // namespace

TEST(Adam, ZeroGradientLeavesParams) {
  std::vector<Tensor> p{with_grad({1.0, -2.0}, {0.0, 0.0})};
  AdamState s;
  adam_step(p, s, {});
  EXPECT_EQ(p[0][0], 1.0);
  EXPECT_EQ(p[0][1], -2.0);
}

TEST(Adam, FirstStepIsSignedLearningRate) {
  std::vector<Tensor> p{with_grad({1.0, 1.0, 1.0}, {0.3, -5.0, 1e-3})};
  AdamState s;
  adam_step(p, s, {.learning_rate = 0.01});
  EXPECT_NEAR(p[0][0], 1.0 - 0.01, 1e-9);
  EXPECT_NEAR(p[0][1], 1.0 + 0.01, 1e-9);
  EXPECT_NEAR(p[0][2], 1.0 - 0.01, 1e-7);
  EXPECT_EQ(s.step, 1u);
}

TEST(Adam, SecondIdenticalStepNoLarger) {
  std::vector<Tensor> p{with_grad({0.0}, {0.5})};
  AdamState s;
  adam_step(p, s, {});
  const double first = -p[0][0];
  adam_step(p, s, {});
  const double second = -p[0][0] - first;
  EXPECT_LE(second, first * 1.1);
  EXPECT_GE(second, first * 0.9);
}

TEST(Adam, NonFiniteGradientRejected) {
  std::vector<Tensor> p{with_grad({1.0, 2.0}, {0.1, std::numeric_limits<double>::quiet_NaN()})};
  AdamState s;
  EXPECT_THROW(adam_step(p, s, {}), std::domain_error);
  EXPECT_EQ(p[0][0], 1.0);
}

TEST(Clip, Examples) {
  std::vector<Tensor> small{with_grad({0, 0}, {0.3, 0.4})};
  EXPECT_NEAR(clip_gradients(small, 1.0), 0.5, 1e-15);
  EXPECT_EQ(small[0].grad(), (std::vector<double>{0.3, 0.4}));

  std::vector<Tensor> big{with_grad({0}, {3.0}), with_grad({0}, {4.0})};
  EXPECT_NEAR(clip_gradients(big, 1.0), 5.0, 1e-15);
  EXPECT_NEAR(big[0].grad()[0], 0.6, 1e-15);
  EXPECT_NEAR(big[1].grad()[0], 0.8, 1e-15);
  EXPECT_LE(global_grad_norm(big), 1.0 + 1e-12);

  std::vector<std::vector<double>> raw{{3.0, 4.0}};
  clip_gradients(raw, 1.0);
  EXPECT_NEAR(raw[0][0], 0.6, 1e-15);
  EXPECT_THROW(clip_gradients(raw, 0.0), std::invalid_argument);
}

TEST(Clip, PostNormBoundedOnRandomGradients) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> g(3, std::vector<double>(7));
    for (auto& v : g) {
      for (double& x : v) x = z(rng);
    }
    const double max_norm = std::pow(10.0, trial % 6 - 4);
    clip_gradients(g, max_norm);
    double sq = 0.0;
    for (const auto& v : g) {
      for (double x : v) sq += x * x;
    }
    EXPECT_LE(std::sqrt(sq), max_norm + 1e-12);
  }
}
