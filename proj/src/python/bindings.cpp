#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dmn/commands.h"
#include "dmn/csv_io.h"
#include "dmn/pipeline.h"
#include "dmn/synth.h"

namespace py = pybind11;
using namespace dmn;

namespace {

std::vector<std::string> iso_dates(const std::vector<Date>& dates) {
  std::vector<std::string> out;
  out.reserve(dates.size());
  for (const auto& d : dates) out.push_back(d.to_string());
  return out;
}

py::dict report_dict(const PerfReport& r) {
  py::dict d;
  const auto v = r.values();
  for (std::size_t k = 0; k < v.size(); ++k) {
    d[py::str(std::string(kMetricNames[k]))] = v[k] ? py::cast(*v[k]) : py::none();
  }
  d["days"] = r.days;
  return d;
}

AssetSeries make_series(const std::string& id, const std::vector<std::string>& dates, const std::vector<double>& prices) {
  AssetSeries a;
  a.asset_id = id;
  for (const auto& s : dates) a.dates.push_back(Date::parse(s));
  a.prices = prices;
  a.validate();
  return a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Deep momentum networks: features, classical rules, training and backtesting";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  py::class_<AssetSeries>(m, "AssetSeries")
      .def(py::init(&make_series), py::arg("asset_id"), py::arg("dates"), py::arg("prices"))
      .def_readonly("asset_id", &AssetSeries::asset_id)
      .def_property_readonly("dates", [](const AssetSeries& a) { return iso_dates(a.dates); })
      .def_readonly("prices", &AssetSeries::prices)
      .def("__len__", &AssetSeries::size);

  m.def("parse_price_csv", [](const std::string& text, const std::string& schema) {
        auto r = parse_price_csv(text, parse_schema(schema));
        return py::make_tuple(r.assets, r.dropped_rows);
      }, py::arg("text"), py::arg("schema") = "long", "Parse price CSV text; returns (assets, dropped_rows).");
  m.def("format_price_csv", [](const std::vector<AssetSeries>& assets, const std::string& schema) {
        return format_price_csv(assets, parse_schema(schema));
      }, py::arg("assets"), py::arg("schema") = "long");

  m.def("ewm_std", [](const std::vector<double>& x, double span, int min_periods) {
        return ewm_std(x, span_to_alpha(span), min_periods);
      }, py::arg("x"), py::arg("span"), py::arg("min_periods") = kEwmMinPeriods);
  m.def("ewm_mean", [](const std::vector<double>& x, double span, int min_periods) {
        return ewm_mean(x, span_to_alpha(span), min_periods);
      }, py::arg("x"), py::arg("span"), py::arg("min_periods") = kEwmMinPeriods);
  m.def("winsorise", [](const std::vector<double>& x) { return winsorise(x); }, py::arg("x"));
  m.def("phi", &phi, py::arg("y"));
  m.def("macd_half_life", &macd_half_life, py::arg("scale"));
  m.def("macd_indicator", [](const std::vector<double>& prices, int s, int l) { return macd_indicator(prices, s, l); },
        py::arg("prices"), py::arg("short_scale"), py::arg("long_scale"));

  m.def("prepare_features", [](std::vector<AssetSeries> assets, bool winsorise_prices) {
        const auto panel = prepare_panel(std::move(assets), winsorise_prices);
        py::dict out;
        for (std::size_t a = 0; a < panel.size(); ++a) {
          const auto& f = panel.features[a];
          py::dict d;
          d["dates"] = iso_dates(f.dates);
          std::vector<std::vector<double>> rows;
          for (const auto& r : f.rows) rows.emplace_back(r.begin(), r.end());
          d["features"] = rows;
          d["valid"] = std::vector<bool>(f.valid.begin(), f.valid.end());
          d["sigma"] = panel.vols[a].sigma;
          d["next_return"] = panel.returns[a].next;
          out[py::str(f.asset_id)] = d;
        }
        return out;
      }, py::arg("assets"), py::arg("winsorise") = true,
      "Per-asset features, validity mask, ex-ante volatility and next-day returns.");

  m.def("synthetic", [](std::size_t trend, std::size_t noise, std::size_t length, std::uint64_t seed) {
        SynthConfig c;
        c.trend_assets = trend;
        c.noise_assets = noise;
        c.length = length;
        c.seed = seed;
        return generate_synthetic(c);
      }, py::arg("trend_assets") = 10, py::arg("noise_assets") = 0, py::arg("length") = 2520, py::arg("seed") = 7);

  m.def("summarise", [](const std::vector<double>& r, bool additive) {
        return report_dict(summarise(r, additive ? DrawdownMode::Additive : DrawdownMode::Compounded));
      }, py::arg("returns"), py::arg("additive_drawdown") = false);
  m.def("max_drawdown", [](const std::vector<double>& r, bool additive) {
        return max_drawdown(r, additive ? DrawdownMode::Additive : DrawdownMode::Compounded);
      }, py::arg("returns"), py::arg("additive_drawdown") = false);

  m.def("sharpe_loss", [](const std::vector<double>& captured) {
        ad::Graph g;
        return sharpe_of(g, ad::Tensor::column(captured)).item();
      }, py::arg("captured_returns"), "Negative annualised Sharpe ratio used as a training loss.");

  m.def("backtest", [](std::vector<AssetSeries> assets, const std::string& strategy, const std::string& loss,
                       double cost_bps, int block_years, std::uint64_t seed, std::size_t search_iters,
                       std::size_t workers) {
        const auto panel = prepare_panel(std::move(assets));
        StrategyConfig sc;
        sc.strategy = parse_strategy(strategy);
        sc.block_years = block_years;
        sc.train.loss = parse_loss(loss);
        sc.train.cost = sc.train.loss == LossKind::SharpeCost ? cost_bps * 1e-4 : 0.0;
        sc.train.seed = seed;
        sc.train.random_search_iters = search_iters;
        sc.train.workers = workers;
        StrategyRun run;
        {
          py::gil_scoped_release release;
          run = run_strategy(panel, sc);
        }
        EvaluationOptions opts;
        opts.cost = cost_bps * 1e-4;
        const auto ev = evaluate(panel, run.positions, run.boundaries, opts);
        py::dict out;
        out["name"] = run.name;
        out["raw"] = report_dict(ev.raw);
        out["rescaled"] = ev.rescaled_report ? py::object(report_dict(*ev.rescaled_report)) : py::none();
        out["dates"] = iso_dates(ev.net.portfolio.dates);
        out["returns"] = ev.net.portfolio.returns;
        out["average_turnover"] = ev.turnover.mean();
        std::vector<std::pair<double, double>> sweep;
        for (const auto& p : ev.sweep) sweep.emplace_back(p.cost_bps, p.sharpe);
        out["cost_sweep"] = sweep;
        return out;
      }, py::arg("assets"), py::arg("strategy") = "sgn", py::arg("loss") = "sharpe", py::arg("cost_bps") = 0.0,
      py::arg("block_years") = 5, py::arg("seed") = 42, py::arg("search_iters") = 50, py::arg("workers") = 1);

  m.def("run_command", [](const std::string& command, const py::dict& options) {
        RunConfig c;
        for (const auto& [key, value] : options) {
          const auto k = py::cast<std::string>(key);
          if (k == "data") c.data = py::cast<std::string>(value);
          else if (k == "schema") c.schema = parse_schema(py::cast<std::string>(value));
          else if (k == "strategy") c.strategy = py::cast<std::string>(value);
          else if (k == "loss") c.loss = py::cast<std::string>(value);
          else if (k == "cost_bps") c.cost_bps = py::cast<double>(value);
          else if (k == "block_years") c.block_years = py::cast<int>(value);
          else if (k == "seed") c.seed = py::cast<std::uint64_t>(value);
          else if (k == "workers") c.workers = py::cast<std::size_t>(value);
          else if (k == "out") c.out = py::cast<std::string>(value);
          else if (k == "search_iters") c.search_iters = py::cast<std::size_t>(value);
          else if (k == "max_epochs") c.max_epochs = py::cast<std::size_t>(value);
          else if (k == "patience") c.patience = py::cast<std::size_t>(value);
          else if (k == "learning_rates") c.learning_rates = py::cast<std::vector<double>>(value);
          else if (k == "hidden_sizes") c.hidden_sizes = py::cast<std::vector<std::size_t>>(value);
          else if (k == "minibatch_sizes") c.minibatch_sizes = py::cast<std::vector<std::size_t>>(value);
          else if (k == "assets") c.trend_assets = py::cast<std::size_t>(value);
          else if (k == "noise_assets") c.noise_assets = py::cast<std::size_t>(value);
          else if (k == "length") c.length = py::cast<std::size_t>(value);
          else throw py::key_error("unknown option '" + k + "'");
        }
        std::ostringstream log, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_command(command, c, log, err);
        }
        return py::make_tuple(code, log.str(), err.str());
      }, py::arg("command"), py::arg("options") = py::dict(),
      "Run a CLI command in-process; returns (exit_code, stdout, stderr).");
}
