#include "dmn/classical_rules.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dmn/csv_io.h"

namespace dmn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Sample standard deviation of x[end - window + 1 .. end]; NaN if the window is not full
// or contains a NaN.
double trailing_std(std::span<const double> x, std::size_t end, std::size_t window) {
  if (end + 1 < window) return kNaN;
  const auto first = x.begin() + static_cast<std::ptrdiff_t>(end + 1 - window);
  const auto last = x.begin() + static_cast<std::ptrdiff_t>(end + 1);
  double mean = 0.0;
  for (auto it = first; it != last; ++it) {
    if (!std::isfinite(*it)) return kNaN;
    mean += *it;
  }
  mean /= static_cast<double>(window);
  double ss = 0.0;
  for (auto it = first; it != last; ++it) ss += (*it - mean) * (*it - mean);
  return std::sqrt(ss / static_cast<double>(window - 1));
}

double sign(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

}  // namespace

PositionFrame long_only(const VolSeries& vols) {
  PositionFrame out;
  for (const auto& v : vols) {
    AssetPositions p{v.asset_id, v.dates, std::vector<double>(v.size(), kNaN)};
    for (std::size_t t = 0; t < v.size(); ++t) {
      if (v.tradeable(t)) p.position[t] = 1.0;
    }
    out.push_back(std::move(p));
  }
  return out;
}

PositionFrame sgn_returns(const ReturnsFrame& returns) {
  constexpr std::size_t kAnnual = kReturnHorizons.size() - 1;
  static_assert(kReturnHorizons[kAnnual] == 252);
  PositionFrame out;
  for (const auto& r : returns) {
    AssetPositions p{r.asset_id, r.dates, std::vector<double>(r.size(), kNaN)};
    for (std::size_t t = 0; t < r.size(); ++t) {
      const double trend = r.horizon[kAnnual][t];
      if (std::isfinite(trend)) p.position[t] = sign(trend);
    }
    out.push_back(std::move(p));
  }
  return out;
}

double macd_half_life(double scale) { return std::log(0.5) / std::log(1.0 - 1.0 / scale); }

std::vector<double> macd_indicator(std::span<const double> prices, int short_scale, int long_scale) {
  if (short_scale < 2 || long_scale <= short_scale) {
    throw std::invalid_argument("macd_indicator: need long > short >= 2");
  }
  // A half-life of log(0.5)/log(1 - 1/S) is a per-step decay of exactly 1 - 1/S.
  const auto fast = ewm_mean(prices, 1.0 / short_scale);
  const auto slow = ewm_mean(prices, 1.0 / long_scale);
  const std::size_t n = prices.size();

  std::vector<double> q(n, kNaN);
  for (std::size_t t = 0; t < n; ++t) {
    const double macd = fast[t] - slow[t];
    const double price_sd = trailing_std(prices, t, kMacdPriceWindow);
    if (std::isfinite(macd) && std::isfinite(price_sd) && price_sd > 0.0) q[t] = macd / price_sd;
  }
  std::vector<double> y(n, kNaN);
  for (std::size_t t = 0; t < n; ++t) {
    if (!std::isfinite(q[t])) continue;
    const double q_sd = trailing_std(q, t, kMacdSignalWindow);
    if (std::isfinite(q_sd) && q_sd > 0.0) y[t] = q[t] / q_sd;
  }
  return y;
}

DatedSeries macd_indicator(const AssetSeries& asset, int short_scale, int long_scale) {
  return {asset.dates, macd_indicator(asset.prices, short_scale, long_scale)};
}

double phi(double y) { return y * std::exp(-y * y / 4.0) / 0.89; }

double combine_macd(std::span<const double> indicators, MacdOptions options) {
  double total = 0.0;
  for (double y : indicators) {
    if (!std::isfinite(y)) return kNaN;
    total += y;
  }
  if (options.average && !indicators.empty()) total /= static_cast<double>(indicators.size());
  return std::clamp(phi(total), -1.0, 1.0);
}

PositionFrame macd_rule(std::span<const AssetSeries> assets, MacdOptions options) {
  PositionFrame out;
  for (const auto& a : assets) {
    std::array<std::vector<double>, kMacdScales.size()> ys;
    for (std::size_t k = 0; k < kMacdScales.size(); ++k) {
      ys[k] = macd_indicator(a.prices, kMacdScales[k].first, kMacdScales[k].second);
    }
    AssetPositions p{a.asset_id, a.dates, std::vector<double>(a.size(), kNaN)};
    for (std::size_t t = 0; t < a.size(); ++t) {
      const std::array<double, kMacdScales.size()> at{ys[0][t], ys[1][t], ys[2][t]};
      p.position[t] = combine_macd(at, options);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string format_positions_csv(const PositionFrame& positions) {
  std::ostringstream out;
  out << "date,asset_id,position,valid\n";
  for (const auto& a : positions) {
    for (std::size_t t = 0; t < a.size(); ++t) {
      out << a.dates[t].to_string() << ',' << a.asset_id << ',' << csv::format(a.position[t]) << ','
          << (a.valid(t) ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

}  // namespace dmn
