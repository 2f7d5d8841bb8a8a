#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmn/classical_rules.h"
#include "dmn/networks.h"
#include "dmn/objectives.h"
#include "dmn/optimiser.h"
#include "dmn/training_data.h"

namespace dmn {

/// Training could not produce a usable model (every candidate diverged, or no data).
class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& what, nlohmann::json diagnostics = {})
      : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}
  const nlohmann::json& diagnostics() const { return diagnostics_; }

 private:
  nlohmann::json diagnostics_;
};

struct HyperParams {
  double dropout_rate = 0.0;
  std::size_t hidden_size = 10;
  std::size_t minibatch_size = 256;
  double learning_rate = 1e-3;
  double max_grad_norm = 1.0;
  double l1_weight = 0.0;  ///< linear model only

  nlohmann::json to_json() const;
  static HyperParams from_json(const nlohmann::json& j);
};

struct SearchGrid {
  std::vector<double> dropout_rate{0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<std::size_t> hidden_size{5, 10, 20, 40, 80};
  std::vector<std::size_t> minibatch_size{256, 512, 1024, 2048};
  std::vector<double> learning_rate{1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1e0};
  std::vector<double> max_grad_norm{1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1};
  std::vector<double> l1_weight{1e-5, 1e-4, 1e-3, 1e-2, 1e-1};

  /// Grid holding exactly one point.
  static SearchGrid single(const HyperParams& hp);
  /// One uniform draw per dimension, in field order.
  HyperParams draw(ad::Rng& rng) const;
  void validate() const;
  nlohmann::json to_json() const;
};

struct TrainConfig {
  Architecture architecture = Architecture::Linear;
  LossKind loss = LossKind::Sharpe;
  double cost = 0.0;  ///< c of the cost-adjusted loss, as a fraction (10 bps = 0.001)
  std::size_t lookback = kDefaultLookback;
  std::size_t max_epochs = 100;
  std::size_t patience = 25;
  double validation_fraction = 0.1;
  std::size_t random_search_iters = 50;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  SearchGrid grid;

  void validate() const;
  ModelSpec model_spec(const HyperParams& hp) const;
  nlohmann::json to_json() const;
};

struct FitResult {
  ModelParams params;  ///< checkpoint of the best validation epoch
  double best_validation_loss = 0.0;
  std::size_t best_epoch = 0;  ///< 1-based
  std::size_t epochs_run = 0;
  std::vector<double> train_curve;
  std::vector<double> validation_curve;
  bool diverged = false;
  std::string diagnostic;
};

/// Validation loss in inference mode over the whole validation set (no penalty term).
double evaluate_loss(const ModelParams& params, const DataSplit& split, std::span<const Unit> units, LossKind kind,
                     double cost);

/// Adam over shuffled minibatches with global-norm clipping and early stopping. Minibatch size
/// counts units (windows or trajectories). A non-finite loss or gradient marks the result
/// diverged instead of throwing. Throws std::invalid_argument on an empty train or validation
/// set.
FitResult train_model(const DataSplit& split, const HyperParams& hp, const TrainConfig& config, std::uint64_t seed);

struct Candidate {
  HyperParams hyper;
  double validation_loss = 0.0;
  std::size_t epochs_run = 0;
  bool diverged = false;
  std::string diagnostic;
};

struct SearchResult {
  HyperParams hyper;
  FitResult fit;
  std::size_t winner = 0;
  std::vector<Candidate> candidates;
};

/// Candidate k draws its hyperparameters and trains with seed `seed ^ k`. The winner has the
/// lowest validation loss, ties going to the lowest index, so the result does not depend on
/// `config.workers`. Throws TrainingError when every candidate diverges.
SearchResult random_search(const DataSplit& split, const TrainConfig& config, std::uint64_t seed);

/// January 1st of first_year + k * block_years for k >= 1, up to `last`.
std::vector<Date> block_boundaries(Date first, Date last, int block_years);

struct BlockResult {
  Date start;  ///< first out-of-sample date (the training cut-off)
  Date end;    ///< exclusive
  bool skipped = false;
  std::string note;
  std::size_t train_units = 0;
  std::size_t validation_units = 0;
  std::optional<SearchResult> search;
};

struct WalkForwardResult {
  TrainConfig config;
  int block_years = 5;
  std::vector<BlockResult> blocks;
  /// Raw model outputs per asset on each asset's own calendar; NaN outside the
  /// out-of-sample span or where no prediction was possible.
  std::vector<std::vector<double>> outputs;
  PositionFrame positions;

  Date oos_start() const { return blocks.front().start; }
  nlohmann::json manifest() const;
};

/// Expanding-window recalibration: for each boundary, random search on data realised before
/// it, then out-of-sample predictions up to the next boundary. Throws DataError when the data
/// do not reach a first boundary.
WalkForwardResult walk_forward(const MarketPanel& panel, const TrainConfig& config, int block_years = 5);

}  // namespace dmn
