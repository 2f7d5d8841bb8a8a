#include "dmn/market_data.h"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "dmn/classical_rules.h"
#include "dmn/csv_io.h"

namespace dmn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Observation {
  Date date;
  double price;
  std::size_t row;
};

std::size_t find_column(const std::vector<std::string_view>& header,
                        std::initializer_list<std::string_view> names) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    for (auto name : names) {
      if (header[i] == name) return i;
    }
  }
  return header.size();
}

// Sorts observations by date and rejects duplicates.
AssetSeries finish_series(const std::string& id, std::vector<Observation> obs) {
  if (obs.empty()) throw DataError("asset '" + id + "' has no usable prices");
  std::stable_sort(obs.begin(), obs.end(),
                   [](const Observation& a, const Observation& b) { return a.date < b.date; });
  AssetSeries series;
  series.asset_id = id;
  series.dates.reserve(obs.size());
  series.prices.reserve(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (i > 0 && obs[i].date == obs[i - 1].date) {
      throw DataError("duplicate date " + obs[i].date.to_string() + " for asset '" + id + "'",
                      std::max(obs[i].row, obs[i - 1].row));
    }
    series.dates.push_back(obs[i].date);
    series.prices.push_back(obs[i].price);
  }
  return series;
}

Date parse_date_field(std::string_view field, std::size_t row) {
  try {
    return Date::parse(field);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what(), row);
  }
}

}  // namespace

void AssetSeries::validate() const {
  if (dates.size() != prices.size()) throw DataError("asset '" + asset_id + "': dates/prices length mismatch");
  if (dates.empty()) throw DataError("asset '" + asset_id + "' is empty");
  for (std::size_t i = 0; i < dates.size(); ++i) {
    if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
      throw DataError("asset '" + asset_id + "': non-positive price on " + dates[i].to_string());
    }
    if (i > 0 && !(dates[i - 1] < dates[i])) {
      throw DataError("asset '" + asset_id + "': dates not strictly increasing at " + dates[i].to_string());
    }
  }
}

CsvSchema parse_schema(std::string_view name) {
  if (name == "wide") return CsvSchema::Wide;
  if (name == "long") return CsvSchema::Long;
  throw std::invalid_argument("unknown CSV schema '" + std::string(name) + "' (expected wide|long)");
}

std::string_view to_string(CsvSchema schema) { return schema == CsvSchema::Wide ? "wide" : "long"; }

LoadResult parse_price_csv(std::string_view text, CsvSchema schema) {
  LoadResult result;
  std::vector<std::string> ids;
  std::unordered_map<std::string, std::vector<Observation>> obs;

  std::size_t row = 0;
  std::size_t pos = 0;
  std::vector<std::string_view> header;
  std::size_t date_col = 0, asset_col = 1, price_col = 2;
  bool have_header = false;

  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++row;
    auto fields = csv::split(line);
    if (fields.size() == 1 && fields[0].empty()) continue;

    if (!have_header) {
      header = fields;
      have_header = true;
      if (schema == CsvSchema::Wide) {
        if (header.size() < 2 || header[0] != "date") {
          throw DataError("wide CSV header must be 'date,<asset1>,...'", row);
        }
        for (std::size_t i = 1; i < header.size(); ++i) {
          std::string id(header[i]);
          if (id.empty()) throw DataError("empty asset name in header", row);
          if (obs.count(id)) throw DataError("duplicate asset column '" + id + "'", row);
          ids.push_back(id);
          obs[id];
        }
      } else {
        date_col = find_column(header, {"date"});
        asset_col = find_column(header, {"asset_id", "asset"});
        price_col = find_column(header, {"price", "close"});
        if (date_col == header.size() || asset_col == header.size() || price_col == header.size()) {
          throw DataError("long CSV header must contain date, asset_id and price", row);
        }
      }
      continue;
    }

    if (fields.size() != header.size()) {
      throw DataError("expected " + std::to_string(header.size()) + " fields, got " +
                          std::to_string(fields.size()),
                      row);
    }

    if (schema == CsvSchema::Wide) {
      const Date date = parse_date_field(fields[0], row);
      for (std::size_t i = 1; i < fields.size(); ++i) {
        if (fields[i].empty()) continue;  // asset not trading on this date
        const auto price = csv::parse_double(fields[i]);
        if (!price || !(*price > 0.0) || !std::isfinite(*price)) {
          ++result.dropped_rows;
          continue;
        }
        obs[ids[i - 1]].push_back({date, *price, row});
      }
    } else {
      const Date date = parse_date_field(fields[date_col], row);
      std::string id(fields[asset_col]);
      if (id.empty()) throw DataError("empty asset_id", row);
      auto [it, inserted] = obs.try_emplace(id);
      if (inserted) ids.push_back(id);
      const auto price = csv::parse_double(fields[price_col]);
      if (!price || !(*price > 0.0) || !std::isfinite(*price)) {
        ++result.dropped_rows;
        continue;
      }
      it->second.push_back({date, *price, row});
    }
  }

  if (!have_header) throw DataError("empty file: header row missing");
  if (ids.empty()) throw DataError("no data rows");
  for (const auto& id : ids) result.assets.push_back(finish_series(id, std::move(obs[id])));
  return result;
}

LoadResult load_csv(const std::filesystem::path& path, CsvSchema schema) {
  if (!std::filesystem::exists(path)) throw DataError("file not found: " + path.string());
  return parse_price_csv(csv::read_file(path), schema);
}

std::string format_price_csv(std::span<const AssetSeries> assets, CsvSchema schema) {
  std::ostringstream out;
  if (schema == CsvSchema::Long) {
    out << "date,asset_id,price\n";
    for (const auto& a : assets) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        out << a.dates[i].to_string() << ',' << a.asset_id << ',' << csv::format(a.prices[i]) << '\n';
      }
    }
    return out.str();
  }
  std::set<Date> calendar;
  for (const auto& a : assets) calendar.insert(a.dates.begin(), a.dates.end());
  out << "date";
  for (const auto& a : assets) out << ',' << a.asset_id;
  out << '\n';
  std::vector<std::size_t> cursor(assets.size(), 0);
  for (const Date& d : calendar) {
    out << d.to_string();
    for (std::size_t k = 0; k < assets.size(); ++k) {
      out << ',';
      const auto& a = assets[k];
      if (cursor[k] < a.size() && a.dates[cursor[k]] == d) {
        out << csv::format(a.prices[cursor[k]]);
        ++cursor[k];
      }
    }
    out << '\n';
  }
  return out.str();
}

double span_to_alpha(double span) { return 2.0 / (span + 1.0); }

double half_life_to_decay(double half_life) { return std::pow(0.5, 1.0 / half_life); }

std::vector<double> ewm_mean(std::span<const double> x, double alpha, int min_periods) {
  const double decay = 1.0 - alpha;
  std::vector<double> out(x.size(), kNaN);
  double weight = 0.0;
  double mean = 0.0;
  int count = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (!std::isfinite(x[t])) continue;
    weight = decay * weight + 1.0;
    mean += (x[t] - mean) / weight;
    if (++count >= min_periods) out[t] = mean;
  }
  return out;
}

std::vector<double> ewm_std(std::span<const double> x, double alpha, int min_periods) {
  const double decay = 1.0 - alpha;
  std::vector<double> out(x.size(), kNaN);
  double weight = 0.0;
  double mean = 0.0;
  double sq_dev = 0.0;  // weighted sum of squared deviations
  int count = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (!std::isfinite(x[t])) continue;
    weight = decay * weight + 1.0;
    const double delta = x[t] - mean;
    mean += delta / weight;
    sq_dev = decay * sq_dev + delta * (x[t] - mean);
    if (++count >= min_periods) out[t] = std::sqrt(std::max(sq_dev / weight, 0.0));
  }
  return out;
}

DatedSeries ewm_std(const DatedSeries& series, int span) {
  if (span < 2) throw std::invalid_argument("ewm_std: span must be >= 2, got " + std::to_string(span));
  if (series.size() < 2) throw std::invalid_argument("ewm_std: need at least 2 points");
  return {series.dates, ewm_std(series.values, span_to_alpha(span), std::min(span, kEwmMinPeriods))};
}

AssetReturns compute_returns(const AssetSeries& asset) {
  const std::size_t n = asset.size();
  AssetReturns r;
  r.asset_id = asset.asset_id;
  r.dates = asset.dates;
  r.daily.assign(n, kNaN);
  r.next.assign(n, kNaN);
  for (auto& h : r.horizon) h.assign(n, kNaN);
  const auto& p = asset.prices;
  for (std::size_t t = 1; t < n; ++t) {
    r.daily[t] = p[t] / p[t - 1] - 1.0;
    r.next[t - 1] = r.daily[t];
  }
  for (std::size_t h = 0; h < kReturnHorizons.size(); ++h) {
    const auto k = static_cast<std::size_t>(kReturnHorizons[h]);
    for (std::size_t t = k; t < n; ++t) r.horizon[h][t] = p[t] / p[t - k] - 1.0;
  }
  return r;
}

ReturnsFrame compute_returns(std::span<const AssetSeries> assets) {
  ReturnsFrame frame;
  frame.reserve(assets.size());
  for (const auto& a : assets) frame.push_back(compute_returns(a));
  return frame;
}

AssetVol exante_vol(const AssetReturns& returns) {
  AssetVol vol;
  vol.asset_id = returns.asset_id;
  vol.dates = returns.dates;
  // daily[0] is NaN and skipped, so the count reaches 60 at index 60.
  vol.sigma = ewm_std(returns.daily, span_to_alpha(kVolatilitySpan), kVolatilitySpan);
  for (double& s : vol.sigma) {
    if (std::isfinite(s)) s *= std::sqrt(kTradingDaysPerYear);
  }
  for (std::size_t t = 0; t < vol.sigma.size(); ++t) {
    if (std::isfinite(vol.sigma[t]) && vol.sigma[t] == 0.0) {
      vol.untradeable_from = t;
      break;
    }
  }
  return vol;
}

VolSeries exante_vol(const ReturnsFrame& returns) {
  VolSeries out;
  out.reserve(returns.size());
  for (const auto& r : returns) out.push_back(exante_vol(r));
  return out;
}

std::vector<double> winsorise(std::span<const double> x, double half_life, double width, int min_periods) {
  const double decay = half_life_to_decay(half_life);
  std::vector<double> out(x.begin(), x.end());
  double weight = 0.0;
  double mean = 0.0;
  double sq_dev = 0.0;
  int count = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (!std::isfinite(x[t])) continue;
    if (count >= min_periods) {
      const double sd = std::sqrt(std::max(sq_dev / weight, 0.0));
      out[t] = std::clamp(x[t], mean - width * sd, mean + width * sd);
    }
    weight = decay * weight + 1.0;
    const double delta = out[t] - mean;
    mean += delta / weight;
    sq_dev = decay * sq_dev + delta * (out[t] - mean);
    ++count;
  }
  return out;
}

DatedSeries winsorise(const DatedSeries& series) {
  if (series.size() == 0) throw std::invalid_argument("winsorise: empty series");
  return {series.dates, winsorise(series.values)};
}

AssetSeries winsorise(const AssetSeries& asset) {
  AssetSeries out = asset;
  out.prices = winsorise(asset.prices);
  return out;
}

AssetFeatures build_features(const AssetSeries& asset, const AssetReturns& returns, const AssetVol& vol) {
  const std::size_t n = asset.size();
  AssetFeatures f;
  f.asset_id = asset.asset_id;
  f.dates = asset.dates;
  f.rows.assign(n, FeatureRow{});
  f.valid.assign(n, 0);

  std::array<std::vector<double>, kMacdScales.size()> macd;
  for (std::size_t k = 0; k < kMacdScales.size(); ++k) {
    macd[k] = macd_indicator(asset.prices, kMacdScales[k].first, kMacdScales[k].second);
  }

  for (std::size_t t = 0; t < n; ++t) {
    FeatureRow& row = f.rows[t];
    const double daily_sigma = vol.sigma[t] / std::sqrt(kTradingDaysPerYear);
    for (std::size_t h = 0; h < kReturnHorizons.size(); ++h) {
      const double scale = daily_sigma * std::sqrt(static_cast<double>(kReturnHorizons[h]));
      row[h] = vol.tradeable(t) ? returns.horizon[h][t] / scale : kNaN;
    }
    for (std::size_t k = 0; k < macd.size(); ++k) row[kReturnHorizons.size() + k] = macd[k][t];
    f.valid[t] = std::all_of(row.begin(), row.end(), [](double v) { return std::isfinite(v); });
  }
  return f;
}

FeatureMatrix build_features(std::span<const AssetSeries> assets) {
  FeatureMatrix out;
  out.reserve(assets.size());
  for (const auto& a : assets) {
    const auto r = compute_returns(a);
    out.push_back(build_features(a, r, exante_vol(r)));
  }
  return out;
}

std::string format_features_csv(const FeatureMatrix& features) {
  std::ostringstream out;
  out << "date,asset_id,f1,f2,f3,f4,f5,f6,f7,f8,valid\n";
  for (const auto& a : features) {
    for (std::size_t t = 0; t < a.size(); ++t) {
      out << a.dates[t].to_string() << ',' << a.asset_id;
      for (double v : a.rows[t]) out << ',' << csv::format(v);
      out << ',' << static_cast<int>(a.valid[t]) << '\n';
    }
  }
  return out.str();
}

std::string format_returns_csv(const ReturnsFrame& returns) {
  std::ostringstream out;
  out << "date,asset_id,daily_return,next_return";
  for (int k : kReturnHorizons) out << ",return_" << k << 'd';
  out << '\n';
  for (const auto& a : returns) {
    for (std::size_t t = 0; t < a.size(); ++t) {
      out << a.dates[t].to_string() << ',' << a.asset_id << ',' << csv::format(a.daily[t]) << ','
          << csv::format(a.next[t]);
      for (const auto& h : a.horizon) out << ',' << csv::format(h[t]);
      out << '\n';
    }
  }
  return out.str();
}

std::string format_vol_csv(const VolSeries& vols) {
  std::ostringstream out;
  out << "date,asset_id,sigma,tradeable\n";
  for (const auto& a : vols) {
    for (std::size_t t = 0; t < a.size(); ++t) {
      out << a.dates[t].to_string() << ',' << a.asset_id << ',' << csv::format(a.sigma[t]) << ','
          << (a.tradeable(t) ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

Date MarketPanel::first_date() const {
  if (assets.empty()) throw std::logic_error("empty panel");
  Date d = assets.front().dates.front();
  for (const auto& a : assets) d = std::min(d, a.dates.front());
  return d;
}

Date MarketPanel::last_date() const {
  if (assets.empty()) throw std::logic_error("empty panel");
  Date d = assets.front().dates.back();
  for (const auto& a : assets) d = std::max(d, a.dates.back());
  return d;
}

MarketPanel prepare_panel(std::vector<AssetSeries> assets, bool winsorise_prices) {
  MarketPanel panel;
  for (auto& a : assets) {
    a.validate();
    if (winsorise_prices) a = winsorise(a);
  }
  panel.assets = std::move(assets);
  panel.returns = compute_returns(panel.assets);
  panel.vols = exante_vol(panel.returns);
  panel.features.reserve(panel.size());
  for (std::size_t i = 0; i < panel.size(); ++i) {
    panel.features.push_back(build_features(panel.assets[i], panel.returns[i], panel.vols[i]));
  }
  return panel;
}

}  // namespace dmn
