#include "dmn/synth.h"

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace dmn {

namespace {

std::string asset_name(const char* prefix, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%02zu", prefix, k + 1);
  return buf;
}

}  // namespace

void SynthConfig::validate() const {
  if (trend_assets + noise_assets == 0) throw std::invalid_argument("synthetic dataset needs at least one asset");
  if (length < 2) throw std::invalid_argument("synthetic length must be at least 2");
  if (!(mean_regime_days >= 1.0)) throw std::invalid_argument("mean regime length must be at least one day");
  if (!(vol > 0.0) || !(vol_of_vol >= 0.0)) throw std::invalid_argument("volatility parameters must be positive");
  if (!(vol_persistence >= 0.0 && vol_persistence < 1.0)) throw std::invalid_argument("vol persistence must lie in [0, 1)");
  if (!(initial_price > 0.0)) throw std::invalid_argument("initial price must be positive");
}

nlohmann::json SynthConfig::to_json() const {
  return {{"trend_assets", trend_assets},
          {"noise_assets", noise_assets},
          {"length", length},
          {"seed", seed},
          {"start", start.to_string()},
          {"drift", drift},
          {"mean_regime_days", mean_regime_days},
          {"vol", vol},
          {"vol_persistence", vol_persistence},
          {"vol_of_vol", vol_of_vol},
          {"initial_price", initial_price}};
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
  SynthConfig c;
  c.trend_assets = j.value("trend_assets", c.trend_assets);
  c.noise_assets = j.value("noise_assets", c.noise_assets);
  c.length = j.value("length", c.length);
  c.seed = j.value("seed", c.seed);
  if (j.contains("start")) c.start = Date::parse(j.at("start").get<std::string>());
  c.drift = j.value("drift", c.drift);
  c.mean_regime_days = j.value("mean_regime_days", c.mean_regime_days);
  c.vol = j.value("vol", c.vol);
  c.vol_persistence = j.value("vol_persistence", c.vol_persistence);
  c.vol_of_vol = j.value("vol_of_vol", c.vol_of_vol);
  c.initial_price = j.value("initial_price", c.initial_price);
  return c;
}

std::vector<Date> business_days(Date start, std::size_t count) {
  std::vector<Date> out;
  out.reserve(count);
  for (Date d = start; out.size() < count; d = d.add_days(1)) {
    if (!d.is_weekend()) out.push_back(d);
  }
  return out;
}

std::vector<AssetSeries> generate_synthetic(const SynthConfig& config) {
  config.validate();
  const auto dates = business_days(config.start, config.length);
  const double root = std::sqrt(kTradingDaysPerYear);
  const double log_vol = std::log(config.vol);
  const double switch_prob = 1.0 / config.mean_regime_days;

  std::vector<AssetSeries> out;
  const std::size_t total = config.trend_assets + config.noise_assets;
  for (std::size_t k = 0; k < total; ++k) {
    const bool trend = k < config.trend_assets;
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(k)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;

    AssetSeries a;
    a.asset_id = trend ? asset_name("trend", k) : asset_name("noise", k - config.trend_assets);
    a.dates = dates;
    a.prices.resize(dates.size());
    double regime = uniform(rng) < 0.5 ? -1.0 : 1.0;
    double h = log_vol;
    double log_price = std::log(config.initial_price);
    a.prices[0] = config.initial_price;
    for (std::size_t t = 1; t < dates.size(); ++t) {
      if (uniform(rng) < switch_prob) regime = -regime;
      h = log_vol + config.vol_persistence * (h - log_vol) + config.vol_of_vol * normal(rng);
      const double mu = trend ? regime * config.drift / kTradingDaysPerYear : 0.0;
      log_price += mu + std::exp(h) / root * normal(rng);
      a.prices[t] = std::exp(log_price);
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace dmn
