#include "dmn/pipeline.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dmn/csv_io.h"

namespace dmn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::LongOnly: return "long_only";
    case Strategy::Sgn: return "sgn";
    case Strategy::Macd: return "macd";
    case Strategy::Linear: return "linear";
    case Strategy::Mlp: return "mlp";
    case Strategy::WaveNet: return "wavenet";
    case Strategy::Lstm: return "lstm";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  for (auto s : {Strategy::LongOnly, Strategy::Sgn, Strategy::Macd, Strategy::Linear, Strategy::Mlp, Strategy::WaveNet,
                 Strategy::Lstm}) {
    if (name == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

bool is_learned(Strategy strategy) {
  return strategy != Strategy::LongOnly && strategy != Strategy::Sgn && strategy != Strategy::Macd;
}

Architecture architecture_of(Strategy strategy) {
  switch (strategy) {
    case Strategy::Linear: return Architecture::Linear;
    case Strategy::Mlp: return Architecture::Mlp;
    case Strategy::WaveNet: return Architecture::WaveNet;
    case Strategy::Lstm: return Architecture::Lstm;
    default: break;
  }
  throw std::invalid_argument("strategy '" + std::string(to_string(strategy)) + "' has no network");
}

PositionFrame mask_before(const PositionFrame& positions, Date from) {
  PositionFrame out = positions;
  for (auto& p : out) {
    for (std::size_t t = 0; t < p.size() && p.dates[t] < from; ++t) p.position[t] = kNaN;
  }
  return out;
}

StrategyRun run_strategy(const MarketPanel& panel, const StrategyConfig& config) {
  if (panel.size() == 0) throw DataError("no assets");
  StrategyRun run;
  run.name = std::string(to_string(config.strategy));
  run.boundaries = block_boundaries(panel.first_date(), panel.last_date(), config.block_years);
  if (run.boundaries.empty()) {
    throw DataError("data end before the first recalibration boundary");
  }
  switch (config.strategy) {
    case Strategy::LongOnly: run.positions = long_only(panel.vols); break;
    case Strategy::Sgn: run.positions = sgn_returns(panel.returns); break;
    case Strategy::Macd: run.positions = macd_rule(panel.assets, config.macd); break;
    default: {
      TrainConfig train = config.train;
      train.architecture = architecture_of(config.strategy);
      run.walk_forward = walk_forward(panel, train, config.block_years);
      run.positions = run.walk_forward->positions;
      run.name += "_" + std::string(to_string(train.loss));
    }
  }
  run.positions = mask_before(run.positions, run.boundaries.front());
  return run;
}

Evaluation evaluate(const MarketPanel& panel, const PositionFrame& positions, const std::vector<Date>& boundaries,
                    const EvaluationOptions& options) {
  Evaluation ev;
  ev.gross = tsmom_returns(positions, panel.returns, panel.vols);
  ev.turnover = turnover(positions, panel.vols);
  ev.net = apply_costs(ev.gross, ev.turnover, options.cost);
  const auto& port = ev.net.portfolio;
  if (port.size() < 2) throw DataError("fewer than two portfolio returns to evaluate");
  ev.raw = summarise(port.returns, options.drawdown);
  if (port.size() >= static_cast<std::size_t>(options.rescale.span) + 2) {
    ev.rescaled = rescale_to_target(port, options.rescale);
    ev.rescaled_report = summarise(ev.rescaled.returns, options.drawdown);
  }
  ev.sweep = cost_sweep(ev.gross, ev.turnover, options.cost_grid_bps);

  std::vector<Date> edges = boundaries;
  std::sort(edges.begin(), edges.end());
  std::size_t first = 0;
  for (std::size_t k = 0; k <= edges.size(); ++k) {
    std::size_t last = first;
    while (last < port.size() && (k == edges.size() || port.dates[last] < edges[k])) ++last;
    if (last - first >= 2) {
      ev.blocks.push_back(summarise(std::span<const double>(port.returns).subspan(first, last - first), options.drawdown));
    }
    first = last;
  }
  ev.crossval = crossval_report(ev.blocks);
  return ev;
}

}  // namespace dmn
