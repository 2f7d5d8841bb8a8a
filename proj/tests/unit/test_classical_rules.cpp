#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dmn/classical_rules.h"
#include "dmn/synth.h"

using namespace dmn;

namespace {

AssetSeries series_from(const std::vector<double>& prices) {
  return {"A", business_days(Date::from_ymd(2000, 1, 3), prices.size()), prices};
}

double sample_std(const std::vector<double>& x, std::size_t end, std::size_t window) {
  double m = 0.0;
  for (std::size_t j = end + 1 - window; j <= end; ++j) m += x[j];
  m /= static_cast<double>(window);
  double ss = 0.0;
  for (std::size_t j = end + 1 - window; j <= end; ++j) ss += (x[j] - m) * (x[j] - m);
  return std::sqrt(ss / static_cast<double>(window - 1));
}

// Direct evaluation: explicit-weight EWM means, explicit rolling sample stds.
std::vector<double> macd_oracle(const std::vector<double>& p, int s, int l) {
  const std::size_t n = p.size();
  auto ewm = [&](std::size_t t, double decay) {
    double w = 0.0, acc = 0.0;
    for (std::size_t j = 0; j <= t; ++j) {
      const double wj = std::pow(decay, static_cast<double>(t - j));
      w += wj;
      acc += wj * p[j];
    }
    return acc / w;
  };
  std::vector<double> q(n, NAN), y(n, NAN);
  for (std::size_t t = 62; t < n; ++t) {
    q[t] = (ewm(t, 1.0 - 1.0 / s) - ewm(t, 1.0 - 1.0 / l)) / sample_std(p, t, 63);
  }
  for (std::size_t t = 62 + 251; t < n; ++t) y[t] = q[t] / sample_std(q, t, 252);
  return y;
}

std::vector<double> random_walk(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0005, 0.01);
  std::vector<double> p{50.0};
  while (p.size() < n) p.push_back(p.back() * (1.0 + z(rng)));
  return p;
}

}  // namespace

TEST(LongOnly, OneWhereVolValid) {
  AssetVol v{"A", business_days(Date::from_ymd(2000, 1, 3), 3), {NAN, 0.2, 0.0}, 2};
  const auto p = long_only({v});
  EXPECT_FALSE(p[0].valid(0));
  EXPECT_EQ(p[0].position[1], 1.0);
  EXPECT_FALSE(p[0].valid(2));
}

TEST(SgnReturns, SignOfAnnualReturn) {
  AssetReturns r;
  r.asset_id = "A";
  r.dates = business_days(Date::from_ymd(2000, 1, 3), 4);
  r.horizon[4] = {NAN, 0.05, -0.10, 0.0};
  const auto p = sgn_returns({r});
  EXPECT_FALSE(p[0].valid(0));
  EXPECT_EQ(p[0].position[1], 1.0);
  EXPECT_EQ(p[0].position[2], -1.0);
  EXPECT_EQ(p[0].position[3], 0.0);
}

TEST(SgnReturns, ScaleInvariant) {
  auto prices = random_walk(600, 3);
  const auto a = sgn_returns(compute_returns(std::vector{series_from(prices)}));
  for (double& p : prices) p *= 37.5;
  const auto b = sgn_returns(compute_returns(std::vector{series_from(prices)}));
  for (std::size_t t = 0; t < prices.size(); ++t) {
    EXPECT_EQ(a[0].valid(t), b[0].valid(t));
    if (a[0].valid(t)) EXPECT_EQ(a[0].position[t], b[0].position[t]);
  }
}

TEST(Macd, HalfLife) { EXPECT_NEAR(macd_half_life(8), std::log(0.5) / std::log(7.0 / 8.0), 1e-12); EXPECT_NEAR(macd_half_life(8), 5.191, 1e-3); }

TEST(Macd, ConstantPricesMasked) {
  for (double y : macd_indicator(std::vector<double>(400, 3.0), 8, 24)) EXPECT_TRUE(std::isnan(y));
}

TEST(Macd, RampIsPositive) {
  std::vector<double> p(400);
  for (std::size_t t = 0; t < p.size(); ++t) p[t] = static_cast<double>(t + 1);
  const auto y = macd_indicator(p, 8, 24);
  std::size_t valid = 0;
  for (double v : y) {
    if (std::isfinite(v)) {
      EXPECT_GT(v, 0.0);
      ++valid;
    }
  }
  EXPECT_EQ(valid, 400u - 313u);
}

TEST(Macd, MatchesBruteForceOracle) {
  const auto p = random_walk(420, 5);
  for (const auto& [s, l] : kMacdScales) {
    const auto y = macd_indicator(p, s, l);
    const auto oracle = macd_oracle(p, s, l);
    for (std::size_t t = 0; t < p.size(); ++t) {
      ASSERT_EQ(std::isfinite(y[t]), std::isfinite(oracle[t])) << t;
      if (std::isfinite(y[t])) EXPECT_NEAR(y[t], oracle[t], 1e-9 * std::max(1.0, std::abs(oracle[t])));
    }
  }
}

TEST(Macd, ScaleInvariant) {
  auto p = random_walk(500, 6);
  const auto a = macd_indicator(p, 16, 48);
  for (double& v : p) v *= 1234.5;
  const auto b = macd_indicator(p, 16, 48);
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (std::isfinite(a[t])) EXPECT_NEAR(a[t], b[t], 1e-9);
  }
}

TEST(Macd, RejectsBadScales) {
  EXPECT_THROW(macd_indicator(std::vector<double>(10, 1.0), 24, 8), std::invalid_argument);
  EXPECT_THROW(macd_indicator(std::vector<double>(10, 1.0), 1, 8), std::invalid_argument);
}

TEST(Phi, SpotValues) {
  EXPECT_EQ(phi(0.0), 0.0);
  EXPECT_NEAR(phi(std::sqrt(2.0)), 0.96378, 1e-5);
  EXPECT_EQ(phi(-0.7), -phi(0.7));
  EXPECT_NEAR(phi(10.0), 10.0 * std::exp(-25.0) / 0.89, 1e-20);
}

TEST(Phi, GridMaximumAtRootTwo) {
  double best = -1.0, arg = 0.0;
  for (int i = -100000; i <= 100000; ++i) {
    const double y = i * 1e-4;
    if (std::abs(phi(y)) > best) {
      best = std::abs(phi(y));
      arg = std::abs(y);
    }
  }
  EXPECT_NEAR(arg, std::sqrt(2.0), 0.01);
}

TEST(MacdRule, CombinesSumThroughPhi) {
  const std::array<double, 3> zero{0.0, 0.0, 0.0};
  EXPECT_EQ(combine_macd(zero), 0.0);
  const double r = std::sqrt(2.0) / 3.0;
  const std::array<double, 3> root{r, r, r};
  EXPECT_NEAR(combine_macd(root), 0.96378, 1e-5);
  EXPECT_NEAR(combine_macd(root, {.average = true}), phi(r), 1e-15);
  const std::array<double, 3> masked{0.1, NAN, 0.2};
  EXPECT_TRUE(std::isnan(combine_macd(masked)));
}

TEST(MacdRule, PositionsBounded) {
  SynthConfig c;
  c.trend_assets = 3;
  c.length = 800;
  const auto assets = generate_synthetic(c);
  for (const auto& a : macd_rule(assets)) {
    for (std::size_t t = 0; t < a.size(); ++t) {
      if (a.valid(t)) EXPECT_LE(std::abs(a.position[t]), 1.0);
    }
  }
}
