#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dmn {

enum class DrawdownMode { Compounded, Additive };

/// Metric columns in report order.
inline constexpr std::array<std::string_view, 9> kMetricNames{
    "E[Return]", "Vol.", "Downside Deviation", "MDD", "Sharpe", "Sortino", "Calmar", "% +ve", "AveP/AveL"};

/// Annualised statistics of a daily return series. Ratios are empty when undefined.
struct PerfReport {
  std::size_t days = 0;
  double expected_return = 0.0;
  double volatility = 0.0;
  std::optional<double> downside_deviation;
  double max_drawdown = 0.0;
  std::optional<double> sharpe;
  std::optional<double> sortino;
  std::optional<double> calmar;
  double fraction_positive = 0.0;
  std::optional<double> profit_loss_ratio;

  /// Values in kMetricNames order.
  std::array<std::optional<double>, kMetricNames.size()> values() const;
  nlohmann::json to_json() const;
};

/// Throws std::invalid_argument with fewer than two returns.
PerfReport summarise(std::span<const double> returns, DrawdownMode mode = DrawdownMode::Compounded);

/// Largest peak-to-trough decline. Compounded: on W_t = prod(1 + r) from W_0 = 1, as a fraction
/// of the peak. Additive: on the cumulative sum from 0, in return units.
double max_drawdown(std::span<const double> returns, DrawdownMode mode = DrawdownMode::Compounded);

struct MetricBand {
  std::optional<double> mean;
  std::optional<double> band;  ///< 2 * sample std; empty with fewer than two blocks
  std::size_t blocks = 0;      ///< blocks where the metric was defined
  std::size_t excluded = 0;    ///< blocks where it was not
};

struct CrossValReport {
  std::array<MetricBand, kMetricNames.size()> metrics;
  nlohmann::json to_json() const;
};

/// Mean and 2-standard-deviation band of every metric across blocks; undefined values are
/// left out of that metric's aggregate and counted.
CrossValReport crossval_report(std::span<const PerfReport> blocks);

/// strategy,<metric columns...>
std::string format_reports_csv(const std::map<std::string, PerfReport>& reports);
nlohmann::json reports_to_json(const std::map<std::string, PerfReport>& reports);
/// strategy,metric,mean,band,blocks,excluded
std::string format_crossval_csv(const std::map<std::string, CrossValReport>& reports);

}  // namespace dmn
