#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "dmn/market_data.h"

namespace dmn {

/// Regime-switching trend generator. Each trend asset carries a drift of +/- drift whose sign
/// flips with probability 1 / mean_regime_days per day; log-volatility follows an AR(1)
/// around log(vol). Noise assets share the volatility process with zero drift.
struct SynthConfig {
  std::size_t trend_assets = 10;
  std::size_t noise_assets = 0;
  std::size_t length = 2520;
  std::uint64_t seed = 7;
  Date start = Date::from_ymd(1990, 1, 1);
  double drift = 0.2;              ///< annualised
  double mean_regime_days = 125.0;
  double vol = 0.15;               ///< annualised long-run level
  double vol_persistence = 0.98;
  double vol_of_vol = 0.05;        ///< daily shock to log-volatility
  double initial_price = 100.0;

  void validate() const;
  nlohmann::json to_json() const;
  static SynthConfig from_json(const nlohmann::json& j);
};

/// Weekdays from `start` onwards.
std::vector<Date> business_days(Date start, std::size_t count);

/// Trend assets are named trend_01.., noise assets noise_01... Asset k draws from its own
/// stream seeded by (seed, k).
std::vector<AssetSeries> generate_synthetic(const SynthConfig& config);

}  // namespace dmn
