#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dmn/classical_rules.h"
#include "dmn/csv_io.h"
#include "dmn/market_data.h"
#include "dmn/synth.h"

using namespace dmn;

namespace {

// Weighted moments over the whole finite prefix with explicit weights (1 - alpha)^k.
std::pair<double, double> explicit_moments(const std::vector<double>& x, std::size_t t, double alpha) {
  double w = 0.0, s = 0.0;
  for (std::size_t j = 0; j <= t; ++j) {
    const double wj = std::pow(1.0 - alpha, static_cast<double>(t - j));
    w += wj;
    s += wj * x[j];
  }
  const double mean = s / w;
  double v = 0.0;
  for (std::size_t j = 0; j <= t; ++j) v += std::pow(1.0 - alpha, static_cast<double>(t - j)) * (x[j] - mean) * (x[j] - mean);
  return {mean, std::sqrt(v / w)};
}

AssetSeries series_from(const std::vector<double>& prices, const std::string& id = "A") {
  AssetSeries a;
  a.asset_id = id;
  a.dates = business_days(Date::from_ymd(2000, 1, 3), prices.size());
  a.prices = prices;
  return a;
}

std::vector<double> random_walk(std::size_t n, unsigned seed, double daily_sd = 0.01) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, daily_sd);
  std::vector<double> p{100.0};
  while (p.size() < n) p.push_back(p.back() * (1.0 + z(rng)));
  return p;
}

}  // namespace

TEST(LoadCsv, WideSingleAsset) {
  const auto r = parse_price_csv("date,X\n2020-01-01,100\n2020-01-02,101\n2020-01-03,102\n", CsvSchema::Wide);
  ASSERT_EQ(r.assets.size(), 1u);
  EXPECT_EQ(r.assets[0].asset_id, "X");
  EXPECT_EQ(r.assets[0].prices, (std::vector<double>{100, 101, 102}));
  EXPECT_EQ(r.dropped_rows, 0u);
}

TEST(LoadCsv, LongInterleavedIsSortedPerAsset) {
  const auto r = parse_price_csv(
      "date,asset_id,price\n2020-01-03,B,3\n2020-01-01,A,1\n2020-01-02,B,2\n2020-01-02,A,2\n2020-01-01,B,1\n",
      CsvSchema::Long);
  ASSERT_EQ(r.assets.size(), 2u);
  for (const auto& a : r.assets) {
    a.validate();
    EXPECT_TRUE(std::is_sorted(a.dates.begin(), a.dates.end()));
  }
  EXPECT_EQ(r.assets[0].asset_id, "B");
  EXPECT_EQ(r.assets[0].size(), 3u);
  EXPECT_EQ(r.assets[1].size(), 2u);
}

TEST(LoadCsv, NegativePriceDroppedAndCounted) {
  const auto r = parse_price_csv(
      "date,asset_id,price\n2020-01-01,A,100\n2020-01-02,A,-5\n2020-01-03,A,101\n2020-01-06,A,abc\n", CsvSchema::Long);
  EXPECT_EQ(r.dropped_rows, 2u);
  EXPECT_EQ(r.assets[0].size(), 2u);
}

TEST(LoadCsv, DuplicateDateRejectedWithRow) {
  try {
    parse_price_csv("date,asset_id,price\n2020-01-01,A,1\n2020-01-02,A,2\n2020-01-02,A,3\n", CsvSchema::Long);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.row(), 4u);
  }
}

TEST(LoadCsv, MalformedRowsRejected) {
  EXPECT_THROW(parse_price_csv("date,asset_id,price\n2020-01-01,A\n", CsvSchema::Long), DataError);
  EXPECT_THROW(parse_price_csv("date,asset_id,price\nnot-a-date,A,1\n", CsvSchema::Long), DataError);
  EXPECT_THROW(parse_price_csv("", CsvSchema::Long), DataError);
  EXPECT_THROW(parse_price_csv("when,X\n2020-01-01,1\n", CsvSchema::Wide), DataError);
  EXPECT_THROW(load_csv("/nonexistent/prices.csv", CsvSchema::Long), DataError);
}

TEST(LoadCsv, FormatRoundTripsBothSchemas) {
  SynthConfig c;
  c.trend_assets = 2;
  c.noise_assets = 1;
  c.length = 50;
  const auto assets = generate_synthetic(c);
  for (auto schema : {CsvSchema::Long, CsvSchema::Wide}) {
    const auto back = parse_price_csv(format_price_csv(assets, schema), schema);
    ASSERT_EQ(back.assets.size(), assets.size());
    for (std::size_t i = 0; i < assets.size(); ++i) {
      EXPECT_EQ(back.assets[i].dates, assets[i].dates);
      EXPECT_EQ(back.assets[i].prices, assets[i].prices);
    }
  }
}

TEST(Ewm, SpanAndHalfLifeConventions) {
  EXPECT_NEAR(span_to_alpha(60), 0.032787, 1e-6);
  EXPECT_NEAR(half_life_to_decay(252), 0.997254, 1e-6);
}

TEST(Ewm, ConstantSeriesHasZeroStd) {
  const std::vector<double> x(40, 5.0);
  const auto s = ewm_std(x, span_to_alpha(60));
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (t + 1 < static_cast<std::size_t>(kEwmMinPeriods)) {
      EXPECT_TRUE(std::isnan(s[t]));
    } else {
      EXPECT_EQ(s[t], 0.0);
    }
  }
}

TEST(Ewm, AlternatingSeriesMatchesExplicitWeights) {
  std::vector<double> x(101);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] = t % 2 ? -1.0 : 1.0;
  const double alpha = span_to_alpha(60);
  const auto s = ewm_std(x, alpha);
  EXPECT_NEAR(s[100], explicit_moments(x, 100, alpha).second, 1e-10);
}

TEST(Ewm, RandomSeriesMatchesExplicitWeights) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z(0.3, 2.0);
  std::vector<double> x(1000);
  for (double& v : x) v = z(rng);
  const double alpha = span_to_alpha(60);
  const auto s = ewm_std(x, alpha);
  const auto m = ewm_mean(x, alpha);
  for (std::size_t t = 9; t < x.size(); t += 37) {
    const auto [mean, sd] = explicit_moments(x, t, alpha);
    EXPECT_NEAR(m[t], mean, 1e-10 * std::abs(mean) + 1e-12);
    EXPECT_NEAR(s[t] / sd, 1.0, 1e-10);
  }
}

TEST(Ewm, DatedOverloadValidatesArguments) {
  DatedSeries s{business_days(Date::from_ymd(2000, 1, 3), 3), {1.0, 2.0, 3.0}};
  EXPECT_THROW(ewm_std(s, 1), std::invalid_argument);
  DatedSeries one{business_days(Date::from_ymd(2000, 1, 3), 1), {1.0}};
  EXPECT_THROW(ewm_std(one, 60), std::invalid_argument);
}

TEST(Returns, SimpleReturnsAndHorizons) {
  const auto a = series_from(random_walk(300, 3));
  const auto r = compute_returns(a);
  EXPECT_TRUE(std::isnan(r.daily[0]));
  EXPECT_TRUE(std::isnan(r.next.back()));
  for (std::size_t t = 1; t < a.size(); ++t) {
    EXPECT_DOUBLE_EQ(r.daily[t], a.prices[t] / a.prices[t - 1] - 1.0);
    EXPECT_DOUBLE_EQ(r.next[t - 1], r.daily[t]);
  }
  EXPECT_TRUE(std::isnan(r.horizon[4][251]));
  EXPECT_DOUBLE_EQ(r.horizon[4][280], a.prices[280] / a.prices[28] - 1.0);
}

TEST(ExanteVol, ConvergesToDailyStdTimesRoot252) {
  const auto a = series_from(random_walk(3000, 5, 0.01));
  const auto v = exante_vol(compute_returns(a));
  EXPECT_TRUE(std::isnan(v.sigma[59]));
  EXPECT_TRUE(std::isfinite(v.sigma[60]));
  double mean = 0.0;
  for (std::size_t t = 500; t < v.size(); ++t) mean += v.sigma[t];
  mean /= static_cast<double>(v.size() - 500);
  EXPECT_NEAR(mean / (0.01 * std::sqrt(252.0)), 1.0, 0.10);
}

TEST(ExanteVol, ConstantPricesAreUntradeable) {
  const auto v = exante_vol(compute_returns(series_from(std::vector<double>(100, 50.0))));
  ASSERT_TRUE(v.untradeable_from.has_value());
  EXPECT_EQ(*v.untradeable_from, 60u);
  EXPECT_FALSE(v.tradeable(80));
}

TEST(Causality, FutureMutationLeavesPastUntouched) {
  auto prices = random_walk(700, 9);
  const auto base = prepare_panel({series_from(prices)});
  for (std::size_t t = 500; t < prices.size(); ++t) prices[t] *= 1.5 + 0.001 * static_cast<double>(t);
  const auto mutated = prepare_panel({series_from(prices)});
  for (std::size_t t = 0; t < 500; ++t) {
    EXPECT_EQ(base.assets[0].prices[t], mutated.assets[0].prices[t]);
    if (std::isfinite(base.vols[0].sigma[t])) EXPECT_EQ(base.vols[0].sigma[t], mutated.vols[0].sigma[t]);
    EXPECT_EQ(base.features[0].valid[t], mutated.features[0].valid[t]);
    if (base.features[0].valid[t]) EXPECT_EQ(base.features[0].rows[t], mutated.features[0].rows[t]);
  }
}

TEST(Winsorise, QuietSeriesUnchanged) {
  std::vector<double> x(200);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] = 10.0 + 0.5 * std::sin(0.3 * static_cast<double>(t));
  EXPECT_EQ(winsorise(x), x);
}

TEST(Winsorise, SpikeClippedToFiveStd) {
  std::vector<double> x(300);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] = std::sin(0.7 * static_cast<double>(t));
  x[250] = 100.0;
  const auto w = winsorise(x);
  for (std::size_t t = 0; t < 250; ++t) ASSERT_EQ(w[t], x[t]);
  const double alpha = 1.0 - half_life_to_decay(252);
  const auto [mean, sd] = explicit_moments(x, 249, alpha);
  EXPECT_NEAR(w[250], mean + 5.0 * sd, 1e-10);
}

TEST(Winsorise, Idempotent) {
  std::mt19937_64 rng(4);
  std::student_t_distribution<double> t3(2.5);
  std::vector<double> x(2000);
  for (double& v : x) v = t3(rng);
  const auto once = winsorise(x);
  EXPECT_NE(once, x);
  EXPECT_EQ(winsorise(once), once);
}

TEST(Features, AnnualFeatureNormalisation) {
  // r_{t-252,t} / (sigma_daily * sqrt(252)) equals r / sigma_t.
  auto a = series_from(random_walk(400, 21));
  const auto r = compute_returns(a);
  const auto v = exante_vol(r);
  const auto f = build_features(a, r, v);
  const std::size_t t = 350;
  ASSERT_TRUE(f.valid[t]);
  EXPECT_NEAR(f.rows[t][4], r.horizon[4][t] / v.sigma[t], 1e-12);
  EXPECT_NEAR(f.rows[t][0], r.horizon[0][t] / (v.sigma[t] / std::sqrt(252.0)), 1e-12);
  EXPECT_NEAR(f.rows[t][2], r.horizon[2][t] / (v.sigma[t] / std::sqrt(252.0) * std::sqrt(63.0)), 1e-12);
  const auto y = macd_indicator(a.prices, 16, 48);
  EXPECT_EQ(f.rows[t][6], y[t]);
}

TEST(Features, ValidityMaskIsMonotone) {
  const auto panel = prepare_panel({series_from(random_walk(800, 8))});
  const auto& valid = panel.features[0].valid;
  const auto first = std::find(valid.begin(), valid.end(), 1) - valid.begin();
  EXPECT_EQ(first, 313);  // 252 MACD signal values after the 63-price window
  for (std::size_t t = static_cast<std::size_t>(first); t < valid.size(); ++t) EXPECT_TRUE(valid[t]);
}

TEST(Features, ConstantPricesMasked) {
  const auto panel = prepare_panel({series_from(std::vector<double>(400, 10.0))}, false);
  for (auto v : panel.features[0].valid) EXPECT_FALSE(v);
}

TEST(Features, CsvHasHeaderAndRows) {
  const auto panel = prepare_panel({series_from(random_walk(320, 1))});
  const auto text = format_features_csv(panel.features);
  EXPECT_EQ(text.substr(0, text.find('\n')), "date,asset_id,f1,f2,f3,f4,f5,f6,f7,f8,valid");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 321);
}
