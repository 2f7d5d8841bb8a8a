#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dmn/market_data.h"

namespace dmn {

/// Per-asset positions X_t in [-1, 1]; NaN marks masked dates.
struct AssetPositions {
  std::string asset_id;
  std::vector<Date> dates;
  std::vector<double> position;

  std::size_t size() const { return dates.size(); }
  bool valid(std::size_t i) const { return std::isfinite(position[i]); }
};
using PositionFrame = std::vector<AssetPositions>;

/// (short, long) time-scale pairs of the multi-scale MACD rule.
inline constexpr std::array<std::pair<int, int>, 3> kMacdScales{{{8, 24}, {16, 48}, {32, 96}}};
inline constexpr std::size_t kMacdPriceWindow = 63;
inline constexpr std::size_t kMacdSignalWindow = 252;

PositionFrame long_only(const VolSeries& vols);

/// X_t = sgn(r_{t-252,t}) with sgn(0) = 0.
PositionFrame sgn_returns(const ReturnsFrame& returns);

/// Half-life implied by MACD time-scale S: log(0.5) / log(1 - 1/S).
double macd_half_life(double scale);

/// Doubly volatility-normalised MACD trend estimate Y_t(S, L). Entries are NaN until both
/// trailing windows (63 prices, 252 normalised values) are full, or when either
/// rolling standard deviation is zero.
std::vector<double> macd_indicator(std::span<const double> prices, int short_scale, int long_scale);
DatedSeries macd_indicator(const AssetSeries& asset, int short_scale, int long_scale);

/// Position sizing curve y * exp(-y^2 / 4) / 0.89, maximal at |y| = sqrt(2).
double phi(double y);

struct MacdOptions {
  /// Divide the three-scale sum by 3 instead of using the plain sum.
  bool average = false;
};

double combine_macd(std::span<const double> indicators, MacdOptions options = {});
PositionFrame macd_rule(std::span<const AssetSeries> assets, MacdOptions options = {});

std::string format_positions_csv(const PositionFrame& positions);

}  // namespace dmn
