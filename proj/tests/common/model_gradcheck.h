#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "dmn/synth.h"
#include "dmn/trainer.h"
#include "dmn/training_data.h"
#include "gradcheck.h"

namespace dmn::testing {

inline constexpr std::array<Architecture, 4> kAllArchitectures{Architecture::Linear, Architecture::Mlp,
                                                               Architecture::WaveNet, Architecture::Lstm};
inline constexpr std::array<LossKind, 5> kAllLosses{LossKind::Mse, LossKind::Binary, LossKind::Returns,
                                                    LossKind::Sharpe, LossKind::SharpeCost};

/// Small seeded panel with enough history for every architecture's input window.
inline MarketPanel gradcheck_panel() {
  SynthConfig c;
  c.trend_assets = 3;
  c.length = 700;
  c.seed = 8;
  return prepare_panel(generate_synthetic(c));
}

/// Analytic vs central-difference gradients of the training loss for one architecture and
/// loss on a batch of 4 units, hidden size 5 and 8-step LSTM trajectories. With dropout the
/// masks are re-drawn from the same seed on every evaluation.
inline GradCheck model_gradient_check(const MarketPanel& panel, Architecture arch, LossKind loss,
                                      double dropout = 0.0, std::uint64_t seed = 3) {
  TrainConfig config;
  config.architecture = arch;
  config.loss = loss;
  HyperParams hp;
  hp.hidden_size = 5;
  hp.dropout_rate = dropout;
  ModelSpec spec = config.model_spec(hp);
  spec.trajectory_length = 8;
  const auto split = make_split(panel, spec, panel.last_date(), 0.1);
  ad::Rng init(seed);
  ModelParams params(spec, init);
  const std::span<const Unit> units(split.train.data() + 40, 4);
  const double cost = 0.01;

  auto evaluate = [&](ad::Graph& graph) {
    ad::Rng masks(seed + 1);
    ForwardOptions options{dropout > 0.0, &masks};
    return units_loss(graph, params, panel, units, loss, cost, options);
  };
  ad::Graph graph;
  const auto value = evaluate(graph);
  params.zero_grad();
  graph.backward(value);
  return check_gradients(params.trainable(), [&] {
    ad::Graph probe;
    probe.set_grad_enabled(false);
    return evaluate(probe).item();
  });
}

}  // namespace dmn::testing
