#include <gtest/gtest.h>

#include <cmath>

#include "dmn/networks.h"
#include "model_gradcheck.h"

using namespace dmn;
using ad::Graph;
using ad::Tensor;

namespace {

ModelSpec make_spec(Architecture arch, OutputHead head, std::size_t hidden = 5) {
  ModelSpec s;
  s.architecture = arch;
  s.head = head;
  s.hidden_size = hidden;
  return s;
}

Tensor random_input(std::size_t rows, std::size_t cols, ad::Rng& rng) {
  std::normal_distribution<double> z;
  std::vector<double> v(rows * cols);
  for (double& x : v) x = z(rng);
  return Tensor::from({rows, cols}, std::move(v));
}

double run(const ModelParams& p, const Tensor& x) {
  Graph g;
  return forward(g, p, std::span<const Tensor>(&x, 1))[0];
}

}  // namespace

TEST(Networks, ParameterShapes) {
  ad::Rng rng(1);
  EXPECT_EQ(ModelParams(make_spec(Architecture::Linear, OutputHead::Tanh), rng).at("w").shape(), (ad::Shape{48, 1}));
  const ModelParams mlp(make_spec(Architecture::Mlp, OutputHead::Tanh, 7), rng);
  EXPECT_EQ(mlp.at("W_h").shape(), (ad::Shape{48, 7}));
  const ModelParams lstm(make_spec(Architecture::Lstm, OutputHead::Tanh, 7), rng);
  EXPECT_EQ(lstm.at("V_f").shape(), (ad::Shape{7, 7}));
  EXPECT_EQ(lstm.at("W_c").shape(), (ad::Shape{8, 7}));
  const ModelParams wn(make_spec(Architecture::WaveNet, OutputHead::Tanh, 7), rng);
  EXPECT_EQ(wn.at("weekly.W").shape(), (ad::Shape{48, 7}));
  EXPECT_EQ(wn.at("monthly.W").shape(), (ad::Shape{28, 7}));
  EXPECT_EQ(wn.at("quarterly.W").shape(), (ad::Shape{21, 7}));
  EXPECT_EQ(wn.spec().input_width(), 63u * 8u);
}

TEST(Networks, ZeroWeightsGiveHeadOfZero) {
  ad::Rng rng(2);
  for (auto arch : {Architecture::Linear, Architecture::Mlp, Architecture::WaveNet}) {
    for (auto head : {OutputHead::Tanh, OutputHead::Sigmoid, OutputHead::Linear}) {
      const auto p = ModelParams::zeros(make_spec(arch, head));
      const double expected = head == OutputHead::Sigmoid ? 0.5 : 0.0;
      EXPECT_EQ(run(p, random_input(3, p.spec().input_width(), rng)), expected);
    }
  }
}

TEST(Networks, LinearProjection) {
  auto p = ModelParams::zeros(make_spec(Architecture::Linear, OutputHead::Linear));
  p.at("w").values()[0] = 1.0;
  std::vector<double> window(48, 0.9);
  window[0] = 0.3;
  EXPECT_DOUBLE_EQ(run(p, Tensor::from({1, 48}, window)), 0.3);
}

TEST(Networks, OutputRangeContracts) {
  ad::Rng rng(3);
  for (auto arch : {Architecture::Linear, Architecture::Mlp}) {
    for (int draw = 0; draw < 1000; ++draw) {
      const ModelParams sig(make_spec(arch, OutputHead::Sigmoid), rng);
      const ModelParams tnh(make_spec(arch, OutputHead::Tanh), rng);
      const Tensor x = random_input(1, 48, rng);
      const double s = run(sig, x);
      const double t = run(tnh, x);
      ASSERT_GT(s, 0.0);
      ASSERT_LT(s, 1.0);
      ASSERT_LT(std::abs(t), 1.0);
    }
  }
}

TEST(Networks, MlpDropoutModes) {
  ad::Rng rng(4);
  auto spec = make_spec(Architecture::Mlp, OutputHead::Tanh);
  spec.dropout_rate = 0.5;
  const ModelParams p(spec, rng);
  const Tensor x = random_input(16, 48, rng);
  Graph g;
  const Tensor a = mlp_forward(g, p, x);
  const Tensor b = mlp_forward(g, p, x);
  EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  ad::Rng mask_rng(9);
  const Tensor c = mlp_forward(g, p, x, {true, &mask_rng});
  EXPECT_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
}

TEST(Networks, WaveNetReceptiveFieldIs63Rows) {
  ad::Rng rng(5);
  const ModelParams p(make_spec(Architecture::WaveNet, OutputHead::Tanh), rng);
  const Tensor x = random_input(1, 64 * 8, rng);  // one extra row in front
  auto predict = [&](const Tensor& full) {
    Graph g;
    return wavenet_forward(g, p, g.slice_cols(full, 8, 64 * 8))[0];
  };
  const double base = predict(x);
  Tensor older = x.clone();
  older.values()[0] += 5.0;  // row t-63 is outside the window
  EXPECT_EQ(predict(older), base);
  Tensor oldest = x.clone();
  oldest.values()[8] += 5.0;  // row t-62
  EXPECT_NE(predict(oldest), base);
  EXPECT_THROW(
      {
        Graph g;
        wavenet_forward(g, p, random_input(1, 62 * 8, rng));
      },
      ad::ShapeError);
}

TEST(Networks, LstmZeroParamsKeepZeroState) {
  const auto p = ModelParams::zeros(make_spec(Architecture::Lstm, OutputHead::Tanh));
  ad::Rng rng(6);
  std::vector<Tensor> steps;
  for (int k = 0; k < 10; ++k) steps.push_back(random_input(2, 8, rng));
  Graph g;
  LstmState state;
  const auto z = lstm_forward(g, p, steps, {}, &state);
  ASSERT_EQ(z.size(), 10u);
  for (const auto& out : z) EXPECT_EQ(out[0], 0.0);
  for (double v : state.c.values()) EXPECT_EQ(v, 0.0);
  for (double v : state.h.values()) EXPECT_EQ(v, 0.0);
}

TEST(Networks, LstmSaturatedForgetGateHoldsCell) {
  ad::Rng rng(7);
  ModelParams p(make_spec(Architecture::Lstm, OutputHead::Tanh), rng);
  for (double& b : p.at("b_f").values()) b = 20.0;
  for (double& b : p.at("b_i").values()) b = -20.0;
  std::vector<Tensor> first{random_input(1, 8, rng)};
  Graph g;
  LstmState state;
  for (double& b : p.at("b_i").values()) b = 20.0;  // load the cell once
  lstm_forward(g, p, first, {}, &state);
  const auto c0 = state.c.clone();
  for (double& b : p.at("b_i").values()) b = -20.0;
  std::vector<Tensor> steps;
  for (int k = 0; k < 10; ++k) steps.push_back(random_input(1, 8, rng));
  lstm_forward(g, p, steps, {}, &state);
  for (std::size_t i = 0; i < c0.size(); ++i) EXPECT_LT(std::abs(state.c[i] - c0[i]), 1e-6);
}

TEST(Networks, GradientsMatchFiniteDifferences) {
  const auto panel = dmn::testing::gradcheck_panel();
  for (auto arch : dmn::testing::kAllArchitectures) {
    for (auto loss : dmn::testing::kAllLosses) {
      const auto r = dmn::testing::model_gradient_check(panel, arch, loss);
      EXPECT_LT(r.max_relative_error, 1e-4) << to_string(arch) << " / " << to_string(loss);
      EXPECT_GT(r.checked, 0u);
    }
  }
}

TEST(Networks, GradientsWithDropoutMatchFiniteDifferences) {
  const auto panel = dmn::testing::gradcheck_panel();
  for (auto arch : {Architecture::Mlp, Architecture::WaveNet, Architecture::Lstm}) {
    const auto r = dmn::testing::model_gradient_check(panel, arch, LossKind::Sharpe, 0.3);
    EXPECT_LT(r.max_relative_error, 1e-4) << to_string(arch);
  }
}

TEST(Networks, CheckpointRoundTrip) {
  ad::Rng rng(8);
  auto spec = make_spec(Architecture::WaveNet, OutputHead::Sigmoid, 6);
  spec.dropout_rate = 0.2;
  const ModelParams p(spec, rng);
  const auto back = ModelParams::from_json(nlohmann::json::parse(p.to_json().dump()));
  EXPECT_EQ(back.spec().hidden_size, 6u);
  EXPECT_EQ(back.spec().head, OutputHead::Sigmoid);
  EXPECT_EQ(back.spec().dropout_rate, 0.2);
  const Tensor x = random_input(3, spec.input_width(), rng);
  Graph g;
  const Tensor a = forward(g, p, std::span<const Tensor>(&x, 1));
  const Tensor b = forward(g, back, std::span<const Tensor>(&x, 1));
  EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
}

TEST(Networks, CopiesAreDeep) {
  ad::Rng rng(9);
  const ModelParams p(make_spec(Architecture::Linear, OutputHead::Tanh), rng);
  ModelParams q = p;
  q.at("w").values()[0] += 1.0;
  EXPECT_NE(q.at("w")[0], p.at("w")[0]);
}

TEST(Networks, PredictionsAreCausal) {
  auto panel = dmn::testing::gradcheck_panel();
  for (auto arch : dmn::testing::kAllArchitectures) {
    ad::Rng rng(10);
    const ModelParams p(make_spec(arch, OutputHead::Tanh), rng);
    auto features = panel.features[0];
    const auto base = predict_asset(p, features, 0, features.size());
    for (std::size_t t = 500; t < features.size(); ++t) {
      for (double& v : features.rows[t]) v += 1.0;
    }
    const auto mutated = predict_asset(p, features, 0, features.size());
    std::size_t finite = 0;
    for (std::size_t t = 0; t < 500; ++t) {
      ASSERT_EQ(std::isfinite(base[t]), std::isfinite(mutated[t]));
      if (std::isfinite(base[t])) {
        EXPECT_EQ(base[t], mutated[t]);
        ++finite;
      }
    }
    EXPECT_GT(finite, 100u) << to_string(arch);
    EXPECT_NE(base[600], mutated[600]);
  }
}

TEST(Networks, PredictSubrangeMatchesFullRange) {
  const auto panel = dmn::testing::gradcheck_panel();
  for (auto arch : dmn::testing::kAllArchitectures) {
    ad::Rng rng(11);
    const ModelParams p(make_spec(arch, OutputHead::Tanh), rng);
    const auto& f = panel.features[1];
    const auto full = predict_asset(p, f, 0, f.size());
    const auto part = predict_asset(p, f, 450, 520);
    ASSERT_EQ(part.size(), 70u);
    for (std::size_t k = 0; k < part.size(); ++k) EXPECT_EQ(part[k], full[450 + k]);
  }
}

TEST(Networks, PositionMapping) {
  EXPECT_EQ(to_position(0.3, OutputHead::Linear), 1.0);
  EXPECT_EQ(to_position(-0.3, OutputHead::Linear), -1.0);
  EXPECT_EQ(to_position(0.4, OutputHead::Sigmoid), -1.0);
  EXPECT_EQ(to_position(0.6, OutputHead::Sigmoid), 1.0);
  EXPECT_EQ(to_position(0.25, OutputHead::Tanh), 0.25);
  EXPECT_TRUE(std::isnan(to_position(NAN, OutputHead::Tanh)));
}
