#include "dmn/trainer.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <thread>

#include "dmn/csv_io.h"

namespace dmn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename T>
const T& pick(const std::vector<T>& grid, ad::Rng& rng) {
  std::uniform_int_distribution<std::size_t> index(0, grid.size() - 1);
  return grid[index(rng)];
}

template <typename T>
void require_nonempty(const std::vector<T>& grid, const char* name) {
  if (grid.empty()) throw std::invalid_argument(std::string("empty search grid for ") + name);
}

nlohmann::json loss_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace

nlohmann::json HyperParams::to_json() const {
  return {{"dropout_rate", dropout_rate},   {"hidden_size", hidden_size},     {"minibatch_size", minibatch_size},
          {"learning_rate", learning_rate}, {"max_grad_norm", max_grad_norm}, {"l1_weight", l1_weight}};
}

HyperParams HyperParams::from_json(const nlohmann::json& j) {
  HyperParams hp;
  hp.dropout_rate = j.at("dropout_rate").get<double>();
  hp.hidden_size = j.at("hidden_size").get<std::size_t>();
  hp.minibatch_size = j.at("minibatch_size").get<std::size_t>();
  hp.learning_rate = j.at("learning_rate").get<double>();
  hp.max_grad_norm = j.at("max_grad_norm").get<double>();
  hp.l1_weight = j.at("l1_weight").get<double>();
  return hp;
}

SearchGrid SearchGrid::single(const HyperParams& hp) {
  SearchGrid g;
  g.dropout_rate = {hp.dropout_rate};
  g.hidden_size = {hp.hidden_size};
  g.minibatch_size = {hp.minibatch_size};
  g.learning_rate = {hp.learning_rate};
  g.max_grad_norm = {hp.max_grad_norm};
  g.l1_weight = {hp.l1_weight};
  return g;
}

HyperParams SearchGrid::draw(ad::Rng& rng) const {
  HyperParams hp;
  hp.dropout_rate = pick(dropout_rate, rng);
  hp.hidden_size = pick(hidden_size, rng);
  hp.minibatch_size = pick(minibatch_size, rng);
  hp.learning_rate = pick(learning_rate, rng);
  hp.max_grad_norm = pick(max_grad_norm, rng);
  hp.l1_weight = pick(l1_weight, rng);
  return hp;
}

void SearchGrid::validate() const {
  require_nonempty(dropout_rate, "dropout_rate");
  require_nonempty(hidden_size, "hidden_size");
  require_nonempty(minibatch_size, "minibatch_size");
  require_nonempty(learning_rate, "learning_rate");
  require_nonempty(max_grad_norm, "max_grad_norm");
  require_nonempty(l1_weight, "l1_weight");
  for (double d : dropout_rate) {
    if (!(d >= 0.0 && d < 1.0)) throw std::invalid_argument("dropout rate must lie in [0, 1)");
  }
  for (auto h : hidden_size) {
    if (h == 0) throw std::invalid_argument("hidden size must be positive");
  }
  for (auto m : minibatch_size) {
    if (m == 0) throw std::invalid_argument("minibatch size must be positive");
  }
  for (double x : learning_rate) {
    if (!(x > 0.0)) throw std::invalid_argument("learning rate must be positive");
  }
  for (double x : max_grad_norm) {
    if (!(x > 0.0)) throw std::invalid_argument("max gradient norm must be positive");
  }
  for (double x : l1_weight) {
    if (!(x >= 0.0)) throw std::invalid_argument("L1 weight must be non-negative");
  }
}

nlohmann::json SearchGrid::to_json() const {
  return {{"dropout_rate", dropout_rate},   {"hidden_size", hidden_size},     {"minibatch_size", minibatch_size},
          {"learning_rate", learning_rate}, {"max_grad_norm", max_grad_norm}, {"l1_weight", l1_weight}};
}

void TrainConfig::validate() const {
  if (patience >= max_epochs) throw std::invalid_argument("patience must be below max_epochs");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("validation fraction must lie in (0, 1)");
  }
  if (random_search_iters == 0) throw std::invalid_argument("random search needs at least one iteration");
  if (workers == 0) throw std::invalid_argument("workers must be positive");
  if (!(cost >= 0.0)) throw std::invalid_argument("transaction cost must be non-negative");
  if (lookback == 0) throw std::invalid_argument("lookback must be positive");
  grid.validate();
}

ModelSpec TrainConfig::model_spec(const HyperParams& hp) const {
  ModelSpec spec;
  spec.architecture = architecture;
  spec.head = head_for(loss);
  spec.hidden_size = hp.hidden_size;
  spec.dropout_rate = architecture == Architecture::Linear ? 0.0 : hp.dropout_rate;
  spec.lookback = lookback;
  return spec;
}

nlohmann::json TrainConfig::to_json() const {
  return {{"architecture", to_string(architecture)},
          {"loss", to_string(loss)},
          {"cost", cost},
          {"lookback", lookback},
          {"max_epochs", max_epochs},
          {"patience", patience},
          {"validation_fraction", validation_fraction},
          {"random_search_iters", random_search_iters},
          {"seed", seed},
          {"workers", workers},
          {"grid", grid.to_json()}};
}

double evaluate_loss(const ModelParams& params, const DataSplit& split, std::span<const Unit> units, LossKind kind,
                     double cost) {
  ad::Graph graph;
  graph.set_grad_enabled(false);
  return units_loss(graph, params, *split.panel, units, kind, cost).item();
}

FitResult train_model(const DataSplit& split, const HyperParams& hp, const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  if (split.panel == nullptr) throw std::invalid_argument("split has no data");
  if (split.train.empty()) throw std::invalid_argument("empty training set");
  if (split.validation.empty()) throw std::invalid_argument("empty validation set");
  if (hp.minibatch_size == 0) throw std::invalid_argument("minibatch size must be positive");

  ad::Rng rng(seed);
  ModelParams params(config.model_spec(hp), rng);
  std::vector<ad::Tensor> weights = params.trainable();
  const bool penalised = config.architecture == Architecture::Linear && hp.l1_weight > 0.0;
  AdamState adam;
  const AdamConfig adam_config{.learning_rate = hp.learning_rate};

  FitResult fit;
  fit.best_validation_loss = kInf;
  std::vector<Unit> units = split.train;
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(units.begin(), units.end(), rng);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t first = 0; first < units.size(); first += hp.minibatch_size) {
      std::size_t count = std::min(hp.minibatch_size, units.size() - first);
      // A single leftover sample joins this batch; a Sharpe ratio needs two.
      if (units.size() - first - count == 1) ++count;
      const std::span<const Unit> batch(units.data() + first, count);
      if (count > hp.minibatch_size) first = units.size();
      ad::Graph graph;
      ad::Tensor loss = units_loss(graph, params, *split.panel, batch, config.loss, config.cost,
                                   ForwardOptions{.training = true, .rng = &rng});
      if (penalised) loss = graph.add(loss, l1_penalty(graph, params.at("w"), hp.l1_weight));
      const double value = loss.item();
      if (!std::isfinite(value)) {
        fit.diverged = true;
        fit.diagnostic = "non-finite training loss at epoch " + std::to_string(epoch);
        break;
      }
      params.zero_grad();
      graph.backward(loss);
      clip_gradients(weights, hp.max_grad_norm);
      try {
        adam_step(weights, adam, adam_config);
      } catch (const std::domain_error& e) {
        fit.diverged = true;
        fit.diagnostic = std::string(e.what()) + " at epoch " + std::to_string(epoch);
        break;
      }
      total += value;
      ++batches;
    }
    if (fit.diverged) break;

    const double val = evaluate_loss(params, split, split.validation, config.loss, config.cost);
    fit.epochs_run = epoch;
    fit.train_curve.push_back(batches ? total / static_cast<double>(batches) : kNaN);
    fit.validation_curve.push_back(val);
    if (!std::isfinite(val)) {
      fit.diverged = true;
      fit.diagnostic = "non-finite validation loss at epoch " + std::to_string(epoch);
      break;
    }
    if (val < fit.best_validation_loss) {
      fit.best_validation_loss = val;
      fit.best_epoch = epoch;
      fit.params = params;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  if (fit.best_epoch == 0) fit.params = params;
  return fit;
}

SearchResult random_search(const DataSplit& split, const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  if (split.train.empty() || split.validation.empty()) throw std::invalid_argument("empty training or validation set");

  const std::size_t n = config.random_search_iters;
  std::vector<Candidate> candidates(n);
  std::vector<FitResult> fits(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      ad::Rng rng(seed ^ k);
      HyperParams hp = config.grid.draw(rng);
      if (config.architecture != Architecture::Linear) hp.l1_weight = 0.0;
      const std::uint64_t train_seed = rng();
      candidates[k].hyper = hp;
      try {
        fits[k] = train_model(split, hp, config, train_seed);
        candidates[k].validation_loss = fits[k].best_validation_loss;
        candidates[k].epochs_run = fits[k].epochs_run;
        candidates[k].diverged = fits[k].diverged;
        candidates[k].diagnostic = fits[k].diagnostic;
      } catch (const std::exception& e) {
        candidates[k].diverged = true;
        candidates[k].validation_loss = kNaN;
        candidates[k].diagnostic = e.what();
      }
    }
  };
  const std::size_t threads = std::min(config.workers, n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  std::optional<std::size_t> winner;
  for (std::size_t k = 0; k < n; ++k) {
    if (candidates[k].diverged) continue;
    if (!winner || candidates[k].validation_loss < candidates[*winner].validation_loss) winner = k;
  }
  if (!winner) {
    nlohmann::json diag = nlohmann::json::array();
    for (const auto& c : candidates) diag.push_back({{"hyper", c.hyper.to_json()}, {"diagnostic", c.diagnostic}});
    throw TrainingError("all " + std::to_string(n) + " random-search candidates diverged", diag);
  }
  SearchResult result;
  result.winner = *winner;
  result.hyper = candidates[*winner].hyper;
  result.fit = std::move(fits[*winner]);
  result.candidates = std::move(candidates);
  return result;
}

std::vector<Date> block_boundaries(Date first, Date last, int block_years) {
  if (block_years <= 0) throw std::invalid_argument("block_years must be positive");
  std::vector<Date> out;
  for (int k = 1;; ++k) {
    const Date b = Date::from_ymd(first.year() + k * block_years, 1, 1);
    if (b > last) break;
    out.push_back(b);
  }
  return out;
}

WalkForwardResult walk_forward(const MarketPanel& panel, const TrainConfig& config, int block_years) {
  config.validate();
  if (panel.size() == 0) throw DataError("no assets to train on");
  const auto boundaries = block_boundaries(panel.first_date(), panel.last_date(), block_years);
  if (boundaries.empty()) {
    throw DataError("data end before the first recalibration boundary (" +
                                Date::from_ymd(panel.first_date().year() + block_years, 1, 1).to_string() + ")");
  }

  WalkForwardResult result;
  result.config = config;
  result.block_years = block_years;
  result.outputs.resize(panel.size());
  result.positions.resize(panel.size());
  for (std::size_t a = 0; a < panel.size(); ++a) {
    const auto& f = panel.features[a];
    result.outputs[a].assign(f.size(), kNaN);
    result.positions[a] = AssetPositions{f.asset_id, f.dates, std::vector<double>(f.size(), kNaN)};
  }

  const ModelSpec layout = config.model_spec(HyperParams{});
  for (std::size_t k = 0; k < boundaries.size(); ++k) {
    BlockResult block;
    block.start = boundaries[k];
    block.end = k + 1 < boundaries.size() ? boundaries[k + 1] : panel.last_date().add_days(1);
    const DataSplit split = make_split(panel, layout, block.start, config.validation_fraction);
    block.train_units = split.train.size();
    block.validation_units = split.validation.size();
    if (split.train.empty() || split.validation.empty()) {
      block.skipped = true;
      block.note = "no usable training or validation data before " + block.start.to_string();
      std::cerr << "warning: block " << block.start.to_string() << " skipped: " << block.note << "\n";
      result.blocks.push_back(std::move(block));
      continue;
    }
    block.search = random_search(split, config, config.seed ^ (static_cast<std::uint64_t>(k) << 32));
    const ModelParams& params = block.search->fit.params;
    for (std::size_t a = 0; a < panel.size(); ++a) {
      const auto& f = panel.features[a];
      const auto begin = static_cast<std::size_t>(std::lower_bound(f.dates.begin(), f.dates.end(), block.start) - f.dates.begin());
      const auto end = static_cast<std::size_t>(std::lower_bound(f.dates.begin(), f.dates.end(), block.end) - f.dates.begin());
      const auto z = predict_asset(params, f, begin, end);
      for (std::size_t i = 0; i < z.size(); ++i) {
        result.outputs[a][begin + i] = z[i];
        result.positions[a].position[begin + i] = to_position(z[i], params.spec().head);
      }
    }
    result.blocks.push_back(std::move(block));
  }
  return result;
}

nlohmann::json WalkForwardResult::manifest() const {
  nlohmann::json blocks_json = nlohmann::json::array();
  for (const auto& b : blocks) {
    nlohmann::json j = {{"start", b.start.to_string()},
                        {"end", b.end.to_string()},
                        {"skipped", b.skipped},
                        {"train_units", b.train_units},
                        {"validation_units", b.validation_units}};
    if (!b.note.empty()) j["note"] = b.note;
    if (b.search) {
      const auto& s = *b.search;
      j["winner"] = s.winner;
      j["hyper"] = s.hyper.to_json();
      j["validation_loss"] = loss_or_null(s.fit.best_validation_loss);
      j["best_epoch"] = s.fit.best_epoch;
      j["epochs_run"] = s.fit.epochs_run;
      nlohmann::json cands = nlohmann::json::array();
      for (const auto& c : s.candidates) {
        nlohmann::json cj = {{"hyper", c.hyper.to_json()},
                             {"validation_loss", loss_or_null(c.validation_loss)},
                             {"epochs_run", c.epochs_run},
                             {"diverged", c.diverged}};
        if (!c.diagnostic.empty()) cj["diagnostic"] = c.diagnostic;
        cands.push_back(std::move(cj));
      }
      j["candidates"] = std::move(cands);
    }
    blocks_json.push_back(std::move(j));
  }
  return {{"seed", config.seed}, {"config", config.to_json()}, {"block_years", block_years}, {"blocks", blocks_json}};
}

}  // namespace dmn
