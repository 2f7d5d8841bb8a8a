#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dmn/graph.h"
#include "dmn/market_data.h"
#include "dmn/networks.h"
#include "dmn/objectives.h"

namespace dmn {

/// One training unit: a single prediction date for feed-forward models, or `length`
/// consecutive prediction dates (a trajectory) for the LSTM.
struct Unit {
  std::size_t asset = 0;
  std::size_t start = 0;
  std::size_t length = 1;
};

/// Chronological per-asset split of every usable sample before a cut-off date.
struct DataSplit {
  const MarketPanel* panel = nullptr;
  ModelSpec spec;
  std::vector<Unit> train;
  std::vector<Unit> validation;
};

/// Sample t of an asset is usable when its feature row is valid, sigma_t > 0, and the next
/// return r_{t,t+1} is realised strictly before `cutoff`. Feed-forward models additionally
/// need every row of their input window valid. Per asset, the earliest (1 - fraction) of the
/// usable samples train and the rest validate. LSTM units are non-overlapping runs of
/// consecutive usable samples, cut separately on each side of the split.
DataSplit make_split(const MarketPanel& panel, const ModelSpec& spec, Date cutoff, double validation_fraction);

/// Window of `rows` feature rows ending at t, flattened oldest first; false if any row is
/// invalid or t is too early.
bool window_valid(const AssetFeatures& features, std::size_t t, std::size_t rows);

/// Runs the model over `units` and evaluates `kind`. For the cost-adjusted loss the
/// previous-day position comes from a second forward pass on the window ending at t - 1
/// (feed-forward) or from the previous step of the trajectory (LSTM, zero at the first step).
ad::Tensor units_loss(ad::Graph& graph, const ModelParams& params, const MarketPanel& panel,
                      std::span<const Unit> units, LossKind kind, double cost, const ForwardOptions& options = {});

}  // namespace dmn
