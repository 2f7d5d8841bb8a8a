#include "dmn/backtester.h"

#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "dmn/csv_io.h"

namespace dmn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_aligned(const std::vector<Date>& a, const std::vector<Date>& b, const std::string& asset) {
  if (a != b) throw std::invalid_argument("calendars of asset '" + asset + "' are not aligned");
}

}  // namespace

double TurnoverFrame::mean() const {
  if (average.empty()) return kNaN;
  return std::accumulate(average.begin(), average.end(), 0.0) / static_cast<double>(average.size());
}

PortfolioSeries aggregate(std::span<const AssetStrategyReturns> assets) {
  std::map<Date, std::pair<double, std::size_t>> days;
  for (const auto& a : assets) {
    for (std::size_t t = 0; t < a.size(); ++t) {
      if (!std::isfinite(a.captured[t])) continue;
      auto& [sum, n] = days[a.dates[t]];
      sum += a.captured[t];
      ++n;
    }
  }
  PortfolioSeries out;
  for (const auto& [date, acc] : days) {
    out.dates.push_back(date);
    out.returns.push_back(acc.first / static_cast<double>(acc.second));
    out.counts.push_back(acc.second);
  }
  return out;
}

StrategyReturns tsmom_returns(const PositionFrame& positions, const ReturnsFrame& returns, const VolSeries& vols,
                              double vol_target) {
  if (positions.size() != returns.size() || positions.size() != vols.size()) {
    throw std::invalid_argument("positions, returns and vols must cover the same assets");
  }
  StrategyReturns out;
  for (std::size_t a = 0; a < positions.size(); ++a) {
    const auto& p = positions[a];
    require_aligned(p.dates, returns[a].dates, p.asset_id);
    require_aligned(p.dates, vols[a].dates, p.asset_id);
    AssetStrategyReturns r{p.asset_id, p.dates, std::vector<double>(p.size(), kNaN)};
    for (std::size_t t = 0; t < p.size(); ++t) {
      const double next = returns[a].next[t];
      if (p.valid(t) && vols[a].tradeable(t) && std::isfinite(next)) {
        r.captured[t] = p.position[t] * (vol_target / vols[a].sigma[t]) * next;
      }
    }
    out.assets.push_back(std::move(r));
  }
  out.portfolio = aggregate(out.assets);
  return out;
}

TurnoverFrame turnover(const PositionFrame& positions, const VolSeries& vols, double vol_target) {
  if (positions.size() != vols.size()) throw std::invalid_argument("positions and vols must cover the same assets");
  TurnoverFrame out;
  std::map<Date, std::pair<double, std::size_t>> days;
  for (std::size_t a = 0; a < positions.size(); ++a) {
    const auto& p = positions[a];
    require_aligned(p.dates, vols[a].dates, p.asset_id);
    AssetTurnover z{p.asset_id, p.dates, std::vector<double>(p.size(), kNaN)};
    double prev = 0.0;  // X_{t-1} / sigma_{t-1}
    for (std::size_t t = 0; t < p.size(); ++t) {
      if (!p.valid(t) || !vols[a].tradeable(t)) {
        prev = 0.0;
        continue;
      }
      const double scaled = p.position[t] / vols[a].sigma[t];
      z.zeta[t] = vol_target * std::abs(scaled - prev);
      prev = scaled;
      auto& [sum, n] = days[p.dates[t]];
      sum += z.zeta[t];
      ++n;
    }
    out.assets.push_back(std::move(z));
  }
  for (const auto& [date, acc] : days) {
    out.dates.push_back(date);
    out.average.push_back(acc.first / static_cast<double>(acc.second));
  }
  return out;
}

StrategyReturns apply_costs(const StrategyReturns& gross, const TurnoverFrame& turnover, double cost) {
  if (!(cost >= 0.0)) throw std::invalid_argument("transaction cost must be non-negative");
  if (gross.assets.size() != turnover.assets.size()) throw std::invalid_argument("returns and turnover not aligned");
  StrategyReturns out;
  out.assets = gross.assets;
  for (std::size_t a = 0; a < out.assets.size(); ++a) {
    auto& r = out.assets[a];
    require_aligned(r.dates, turnover.assets[a].dates, r.asset_id);
    for (std::size_t t = 0; t < r.size(); ++t) {
      if (std::isfinite(r.captured[t])) r.captured[t] -= cost * turnover.assets[a].zeta[t];
    }
  }
  out.portfolio = aggregate(out.assets);
  return out;
}

PortfolioSeries rescale_to_target(const PortfolioSeries& portfolio, const RescaleOptions& options) {
  const auto n = portfolio.size();
  if (options.span < 2 || n < static_cast<std::size_t>(options.span)) {
    throw std::invalid_argument("rescaling needs at least " + std::to_string(options.span) + " portfolio returns");
  }
  PortfolioSeries out;
  const double root = std::sqrt(kTradingDaysPerYear);
  if (options.mode == RescaleMode::ExPost) {
    const double mean = std::accumulate(portfolio.returns.begin(), portfolio.returns.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double r : portfolio.returns) ss += (r - mean) * (r - mean);
    const double vol = std::sqrt(ss / static_cast<double>(n - 1)) * root;
    const double factor = vol > 0.0 ? std::min(options.vol_target / vol, options.max_leverage) : options.max_leverage;
    out = portfolio;
    for (double& r : out.returns) r *= factor;
    return out;
  }
  // sigma_hat used at t is estimated from returns dated up to t-1.
  const auto sigma = ewm_std(portfolio.returns, span_to_alpha(options.span), options.span);
  for (std::size_t t = 1; t < n; ++t) {
    const double s = sigma[t - 1];
    if (!std::isfinite(s)) continue;
    const double vol = s * root;
    const double factor = vol > 0.0 ? std::min(options.vol_target / vol, options.max_leverage) : options.max_leverage;
    out.dates.push_back(portfolio.dates[t]);
    out.returns.push_back(portfolio.returns[t] * factor);
    out.counts.push_back(portfolio.counts[t]);
  }
  return out;
}

double annualised_sharpe(std::span<const double> returns) {
  const auto n = returns.size();
  if (n < 2) return kNaN;
  const double mean = std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double r : returns) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return sd > 0.0 ? mean / sd * std::sqrt(kTradingDaysPerYear) : kNaN;
}

std::vector<CostPoint> cost_sweep(const StrategyReturns& gross, const TurnoverFrame& turnover,
                                  std::span<const double> costs_bps) {
  std::vector<CostPoint> out;
  for (std::size_t k = 0; k < costs_bps.size(); ++k) {
    if (!(costs_bps[k] >= 0.0)) throw std::invalid_argument("costs must be non-negative");
    if (k > 0 && costs_bps[k] < costs_bps[k - 1]) throw std::invalid_argument("costs must be ascending");
    const auto net = apply_costs(gross, turnover, costs_bps[k] * 1e-4);
    out.push_back({costs_bps[k], annualised_sharpe(net.portfolio.returns)});
  }
  return out;
}

std::string format_strategy_returns_csv(const StrategyReturns& returns) {
  std::string out = "date,asset_id,captured_return\n";
  for (const auto& a : returns.assets) {
    for (std::size_t t = 0; t < a.size(); ++t) {
      if (!std::isfinite(a.captured[t])) continue;
      out += a.dates[t].to_string() + "," + a.asset_id + "," + csv::format(a.captured[t]) + "\n";
    }
  }
  return out;
}

std::string format_portfolio_csv(const PortfolioSeries& portfolio) {
  std::string out = "date,return,n_assets\n";
  for (std::size_t t = 0; t < portfolio.size(); ++t) {
    out += portfolio.dates[t].to_string() + "," + csv::format(portfolio.returns[t]) + "," +
           std::to_string(portfolio.counts[t]) + "\n";
  }
  return out;
}

std::string format_turnover_csv(const TurnoverFrame& turnover) {
  std::string out = "date,asset_id,turnover\n";
  for (const auto& a : turnover.assets) {
    for (std::size_t t = 0; t < a.dates.size(); ++t) {
      if (!std::isfinite(a.zeta[t])) continue;
      out += a.dates[t].to_string() + "," + a.asset_id + "," + csv::format(a.zeta[t]) + "\n";
    }
  }
  for (std::size_t t = 0; t < turnover.dates.size(); ++t) {
    out += turnover.dates[t].to_string() + ",_average," + csv::format(turnover.average[t]) + "\n";
  }
  return out;
}

std::string format_cost_sweep_csv(std::span<const CostPoint> sweep) {
  std::string out = "cost_bps,sharpe\n";
  for (const auto& p : sweep) out += csv::format(p.cost_bps) + "," + csv::format(p.sharpe) + "\n";
  return out;
}

std::string format_cumulative_csv(const PortfolioSeries& portfolio) {
  std::string out = "date,return,wealth\n";
  double wealth = 1.0;
  for (std::size_t t = 0; t < portfolio.size(); ++t) {
    wealth *= 1.0 + portfolio.returns[t];
    out += portfolio.dates[t].to_string() + "," + csv::format(portfolio.returns[t]) + "," + csv::format(wealth) + "\n";
  }
  return out;
}

}  // namespace dmn
