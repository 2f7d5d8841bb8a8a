#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dmn/date.h"

namespace dmn {

inline constexpr double kTradingDaysPerYear = 252.0;
inline constexpr int kVolatilitySpan = 60;
/// EWM statistics are masked until this many observations have been seen.
inline constexpr int kEwmMinPeriods = 10;
inline constexpr double kWinsorHalfLife = 252.0;
inline constexpr double kWinsorWidth = 5.0;
inline constexpr std::array<int, 5> kReturnHorizons{1, 21, 63, 126, 252};
inline constexpr std::size_t kFeatureCount = 8;

/// One instrument's dated price history.
struct AssetSeries {
  std::string asset_id;
  std::vector<Date> dates;
  std::vector<double> prices;

  std::size_t size() const { return dates.size(); }
  /// Throws DataError unless dates are strictly increasing and prices positive.
  void validate() const;
};

enum class CsvSchema { Wide, Long };

CsvSchema parse_schema(std::string_view name);
std::string_view to_string(CsvSchema schema);

struct LoadResult {
  std::vector<AssetSeries> assets;
  std::size_t dropped_rows = 0;
};

/// Wide: `date,<asset1>,<asset2>,...`; long: `date,asset_id,price`.
/// Non-numeric or non-positive prices are dropped and counted. Unparseable dates,
/// malformed rows and duplicate (asset, date) pairs reject the whole file.
LoadResult load_csv(const std::filesystem::path& path, CsvSchema schema);
LoadResult parse_price_csv(std::string_view text, CsvSchema schema);
std::string format_price_csv(std::span<const AssetSeries> assets, CsvSchema schema);

/// Span convention: alpha = 2 / (span + 1).
double span_to_alpha(double span);
/// Per-step decay lambda with lambda^half_life = 0.5.
double half_life_to_decay(double half_life);

/// Causal exponentially weighted mean with weights (1 - alpha)^k over the whole prefix.
/// NaN inputs are skipped; outputs are NaN until `min_periods` observations are seen.
std::vector<double> ewm_mean(std::span<const double> x, double alpha, int min_periods = kEwmMinPeriods);

/// Causal exponentially weighted standard deviation (population form, no bias correction),
/// updated recursively and equal to the explicit-weight computation over the prefix.
std::vector<double> ewm_std(std::span<const double> x, double alpha, int min_periods = kEwmMinPeriods);

/// Dated real series; NaN marks masked entries.
struct DatedSeries {
  std::vector<Date> dates;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool valid(std::size_t i) const { return std::isfinite(values[i]); }
};

/// Throws std::invalid_argument for span < 2 or fewer than two points.
DatedSeries ewm_std(const DatedSeries& series, int span);

/// Per-asset returns, all indexed by the asset's own calendar.
struct AssetReturns {
  std::string asset_id;
  std::vector<Date> dates;
  std::vector<double> daily;  ///< r_{t-1,t}; NaN on the first date.
  std::vector<double> next;   ///< r_{t,t+1}; NaN on the last date.
  std::array<std::vector<double>, kReturnHorizons.size()> horizon;  ///< r_{t-k,t}

  std::size_t size() const { return dates.size(); }
};
using ReturnsFrame = std::vector<AssetReturns>;

AssetReturns compute_returns(const AssetSeries& asset);
ReturnsFrame compute_returns(std::span<const AssetSeries> assets);

/// Annualised ex-ante volatility. NaN during warm-up; zero marks an untradeable date.
struct AssetVol {
  std::string asset_id;
  std::vector<Date> dates;
  std::vector<double> sigma;
  std::optional<std::size_t> untradeable_from;

  std::size_t size() const { return dates.size(); }
  bool tradeable(std::size_t i) const { return std::isfinite(sigma[i]) && sigma[i] > 0.0; }
};
using VolSeries = std::vector<AssetVol>;

/// sigma_t = ewm_std(daily returns up to r_{t-1,t}, span 60) * sqrt(252), emitted once 60
/// daily returns are available.
AssetVol exante_vol(const AssetReturns& returns);
VolSeries exante_vol(const ReturnsFrame& returns);

/// Caps/floors each value to within `width` EWM standard deviations of the EWM mean. The
/// statistics are built from earlier *output* values only, which makes the operation
/// idempotent. Values pass through unchanged until `min_periods` earlier points exist.
std::vector<double> winsorise(std::span<const double> x, double half_life = kWinsorHalfLife,
                              double width = kWinsorWidth, int min_periods = kEwmMinPeriods);
DatedSeries winsorise(const DatedSeries& series);
AssetSeries winsorise(const AssetSeries& asset);

using FeatureRow = std::array<double, kFeatureCount>;

/// Inputs u_t: five volatility-normalised returns followed by three MACD indicators.
struct AssetFeatures {
  std::string asset_id;
  std::vector<Date> dates;
  std::vector<FeatureRow> rows;
  std::vector<std::uint8_t> valid;

  std::size_t size() const { return dates.size(); }
};
using FeatureMatrix = std::vector<AssetFeatures>;

AssetFeatures build_features(const AssetSeries& asset, const AssetReturns& returns, const AssetVol& vol);
FeatureMatrix build_features(std::span<const AssetSeries> assets);

std::string format_features_csv(const FeatureMatrix& features);
std::string format_returns_csv(const ReturnsFrame& returns);
std::string format_vol_csv(const VolSeries& vols);

/// Everything derived from the raw prices, aligned per asset and per date index.
struct MarketPanel {
  std::vector<AssetSeries> assets;
  ReturnsFrame returns;
  VolSeries vols;
  FeatureMatrix features;

  std::size_t size() const { return assets.size(); }
  Date first_date() const;
  Date last_date() const;
};

MarketPanel prepare_panel(std::vector<AssetSeries> assets, bool winsorise_prices = true);

}  // namespace dmn
