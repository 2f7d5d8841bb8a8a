#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dmn/backtester.h"
#include "dmn/classical_rules.h"
#include "dmn/perf_metrics.h"
#include "dmn/trainer.h"

namespace dmn {

enum class Strategy { LongOnly, Sgn, Macd, Linear, Mlp, WaveNet, Lstm };

std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view name);
bool is_learned(Strategy strategy);
Architecture architecture_of(Strategy strategy);

struct StrategyConfig {
  Strategy strategy = Strategy::Sgn;
  TrainConfig train;  ///< learned strategies only; architecture is taken from `strategy`
  int block_years = 5;
  MacdOptions macd;
};

struct StrategyRun {
  std::string name;
  PositionFrame positions;  ///< NaN outside [oos_start, end of data]
  std::vector<Date> boundaries;
  std::optional<WalkForwardResult> walk_forward;
};

/// Positions over the out-of-sample span shared by every strategy: from the first
/// recalibration boundary to the end of the data. Learned strategies are trained by walk-forward.
StrategyRun run_strategy(const MarketPanel& panel, const StrategyConfig& config);

/// Copy of `positions` with everything dated before `from` masked.
PositionFrame mask_before(const PositionFrame& positions, Date from);

struct EvaluationOptions {
  double cost = 0.0;  ///< fraction; applied to the "net" series
  RescaleOptions rescale;
  DrawdownMode drawdown = DrawdownMode::Compounded;
  std::vector<double> cost_grid_bps = kDefaultCostGridBps;
};

struct Evaluation {
  StrategyReturns gross;
  StrategyReturns net;
  TurnoverFrame turnover;
  PortfolioSeries rescaled;  ///< rescaled net portfolio
  PerfReport raw;            ///< raw-signal net portfolio
  std::optional<PerfReport> rescaled_report;
  std::vector<CostPoint> sweep;
  std::vector<PerfReport> blocks;  ///< raw net portfolio, per block with at least two days
  CrossValReport crossval;
};

/// Returns, turnover, costs, rescaling and reports for one set of positions. `boundaries`
/// split the series into evaluation blocks.
Evaluation evaluate(const MarketPanel& panel, const PositionFrame& positions, const std::vector<Date>& boundaries,
                    const EvaluationOptions& options = {});

}  // namespace dmn
