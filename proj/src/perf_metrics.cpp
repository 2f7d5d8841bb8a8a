#include "dmn/perf_metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dmn/csv_io.h"
#include "dmn/market_data.h"

namespace dmn {

namespace {

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

std::optional<double> sample_std(std::span<const double> x) {
  if (x.size() < 2) return std::nullopt;
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

std::optional<double> ratio(double num, std::optional<double> den) {
  if (!den || !(*den > 0.0)) return std::nullopt;
  return num / *den;
}

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

std::string cell(const std::optional<double>& v) { return v ? csv::format(*v) : "n/a"; }

}  // namespace

std::array<std::optional<double>, kMetricNames.size()> PerfReport::values() const {
  return {expected_return, volatility, downside_deviation, max_drawdown, sharpe,
          sortino,         calmar,     fraction_positive,  profit_loss_ratio};
}

nlohmann::json PerfReport::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  const auto v = values();
  for (std::size_t k = 0; k < v.size(); ++k) j[std::string(kMetricNames[k])] = opt(v[k]);
  j["days"] = days;
  return j;
}

double max_drawdown(std::span<const double> returns, DrawdownMode mode) {
  if (returns.empty()) throw std::invalid_argument("drawdown of an empty series");
  double level = mode == DrawdownMode::Compounded ? 1.0 : 0.0;
  double peak = level;
  double worst = 0.0;
  for (double r : returns) {
    level = mode == DrawdownMode::Compounded ? level * (1.0 + r) : level + r;
    peak = std::max(peak, level);
    const double dd = mode == DrawdownMode::Compounded ? (peak - level) / peak : peak - level;
    worst = std::max(worst, dd);
  }
  return worst;
}

PerfReport summarise(std::span<const double> returns, DrawdownMode mode) {
  if (returns.size() < 2) throw std::invalid_argument("performance summary needs at least two returns");
  const double root = std::sqrt(kTradingDaysPerYear);
  PerfReport rep;
  rep.days = returns.size();
  rep.expected_return = mean_of(returns) * kTradingDaysPerYear;
  rep.volatility = *sample_std(returns) * root;

  std::vector<double> gains;
  std::vector<double> losses;
  for (double r : returns) {
    if (r > 0.0) gains.push_back(r);
    if (r < 0.0) losses.push_back(r);
  }
  if (auto sd = sample_std(losses)) rep.downside_deviation = *sd * root;
  rep.max_drawdown = max_drawdown(returns, mode);
  rep.sharpe = ratio(rep.expected_return, rep.volatility);
  rep.sortino = ratio(rep.expected_return, rep.downside_deviation);
  rep.calmar = ratio(rep.expected_return, rep.max_drawdown);
  rep.fraction_positive = static_cast<double>(gains.size()) / static_cast<double>(returns.size());
  if (!gains.empty() && !losses.empty()) rep.profit_loss_ratio = mean_of(gains) / std::abs(mean_of(losses));
  return rep;
}

CrossValReport crossval_report(std::span<const PerfReport> blocks) {
  if (blocks.empty()) throw std::invalid_argument("cross-validation report needs at least one block");
  CrossValReport out;
  for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
    std::vector<double> xs;
    for (const auto& b : blocks) {
      if (const auto v = b.values()[k]) xs.push_back(*v);
    }
    auto& m = out.metrics[k];
    m.blocks = xs.size();
    m.excluded = blocks.size() - xs.size();
    if (xs.empty()) continue;
    m.mean = mean_of(xs);
    if (const auto sd = sample_std(xs)) m.band = 2.0 * *sd;
  }
  return out;
}

nlohmann::json CrossValReport::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
    const auto& m = metrics[k];
    j[std::string(kMetricNames[k])] = {
        {"mean", opt(m.mean)}, {"band", opt(m.band)}, {"blocks", m.blocks}, {"excluded", m.excluded}};
  }
  return j;
}

std::string format_reports_csv(const std::map<std::string, PerfReport>& reports) {
  std::string out = "strategy";
  for (auto name : kMetricNames) out += "," + std::string(name);
  out += "\n";
  for (const auto& [strategy, rep] : reports) {
    out += strategy;
    for (const auto& v : rep.values()) out += "," + cell(v);
    out += "\n";
  }
  return out;
}

nlohmann::json reports_to_json(const std::map<std::string, PerfReport>& reports) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [strategy, rep] : reports) j[strategy] = rep.to_json();
  return j;
}

std::string format_crossval_csv(const std::map<std::string, CrossValReport>& reports) {
  std::string out = "strategy,metric,mean,band,blocks,excluded\n";
  for (const auto& [strategy, rep] : reports) {
    for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
      const auto& m = rep.metrics[k];
      out += strategy + "," + std::string(kMetricNames[k]) + "," + cell(m.mean) + "," + cell(m.band) + "," +
             std::to_string(m.blocks) + "," + std::to_string(m.excluded) + "\n";
    }
  }
  return out;
}

}  // namespace dmn
