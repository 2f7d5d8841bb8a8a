#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dmn/classical_rules.h"
#include "dmn/market_data.h"
#include "dmn/objectives.h"

namespace dmn {

/// Captured returns of one asset, indexed like its positions; NaN where not traded.
struct AssetStrategyReturns {
  std::string asset_id;
  std::vector<Date> dates;
  std::vector<double> captured;
  std::size_t size() const { return dates.size(); }
};

/// Equal-weight portfolio over the union calendar. Returns are dated by the position date t
/// and realised over (t, t+1].
struct PortfolioSeries {
  std::vector<Date> dates;
  std::vector<double> returns;
  std::vector<std::size_t> counts;  ///< N_t
  std::size_t size() const { return dates.size(); }
};

struct StrategyReturns {
  std::vector<AssetStrategyReturns> assets;
  PortfolioSeries portfolio;
};

struct AssetTurnover {
  std::string asset_id;
  std::vector<Date> dates;
  std::vector<double> zeta;  ///< NaN where the position is not valid
};

struct TurnoverFrame {
  std::vector<AssetTurnover> assets;
  std::vector<Date> dates;
  std::vector<double> average;  ///< mean zeta over assets valid that day

  /// Mean of the daily averages.
  double mean() const;
};

/// Mean over the valid assets on each date of the union calendar; dates with N_t = 0 are
/// omitted.
PortfolioSeries aggregate(std::span<const AssetStrategyReturns> assets);

/// R(i,t) = X_t * (vol_target / sigma_t) * r_{t,t+1}, valid where X_t, sigma_t > 0 and the
/// next return all exist. Positions must be on the same per-asset calendars as the returns.
StrategyReturns tsmom_returns(const PositionFrame& positions, const ReturnsFrame& returns, const VolSeries& vols,
                              double vol_target = kVolTarget);

/// zeta_t = vol_target * |X_t / sigma_t - X_{t-1} / sigma_{t-1}|, with the previous term zero on
/// the first valid date and after any gap.
TurnoverFrame turnover(const PositionFrame& positions, const VolSeries& vols, double vol_target = kVolTarget);

/// R(i,t) - c * zeta_t per asset, re-aggregated. Throws std::invalid_argument for c < 0.
StrategyReturns apply_costs(const StrategyReturns& gross, const TurnoverFrame& turnover, double cost);

enum class RescaleMode { Causal, ExPost };

struct RescaleOptions {
  RescaleMode mode = RescaleMode::Causal;
  double vol_target = kVolTarget;
  double max_leverage = 20.0;
  int span = kVolatilitySpan;
};

/// Causal mode scales r_t by min(target / sigma_hat, cap) where sigma_hat is the annualised
/// EWM volatility of the portfolio returns strictly before t; dates before the estimator has
/// `span` observations are dropped. Ex-post mode applies one whole-sample factor (non-causal).
/// Throws std::invalid_argument with fewer than `span` returns.
PortfolioSeries rescale_to_target(const PortfolioSeries& portfolio, const RescaleOptions& options = {});

struct CostPoint {
  double cost_bps;
  double sharpe;
};

inline const std::vector<double> kDefaultCostGridBps{0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0};

/// Annualised Sharpe of the cost-adjusted portfolio for each cost in basis points.
std::vector<CostPoint> cost_sweep(const StrategyReturns& gross, const TurnoverFrame& turnover,
                                  std::span<const double> costs_bps = kDefaultCostGridBps);

/// Annualised Sharpe, mean / sample std * sqrt(252); NaN when undefined.
double annualised_sharpe(std::span<const double> returns);

std::string format_strategy_returns_csv(const StrategyReturns& returns);
std::string format_portfolio_csv(const PortfolioSeries& portfolio);
std::string format_turnover_csv(const TurnoverFrame& turnover);
std::string format_cost_sweep_csv(std::span<const CostPoint> sweep);
/// date,return,wealth with compounded wealth starting at 1.
std::string format_cumulative_csv(const PortfolioSeries& portfolio);

}  // namespace dmn
