#include "dmn/commands.h"

#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "dmn/csv_io.h"
#include "dmn/pipeline.h"
#include "dmn/synth.h"

namespace dmn {

namespace {

using nlohmann::json;

void write_json(const std::filesystem::path& path, const json& j) { csv::write_file(path, j.dump(2) + "\n"); }

MarketPanel load_panel(const RunConfig& config, std::size_t* dropped = nullptr) {
  if (config.data.empty()) throw std::invalid_argument("--data is required");
  auto loaded = load_csv(config.data, config.schema);
  if (loaded.assets.empty()) throw DataError("no assets in " + config.data.string());
  if (dropped) *dropped = loaded.dropped_rows;
  return prepare_panel(std::move(loaded.assets), config.winsorise);
}

StrategyConfig strategy_config(const RunConfig& config) {
  StrategyConfig sc;
  sc.strategy = parse_strategy(config.strategy);
  sc.block_years = config.block_years;
  sc.macd.average = config.macd_average;
  auto& t = sc.train;
  t.loss = parse_loss(config.loss);
  if (config.cost_bps < 0.0) throw std::invalid_argument("--cost-bps must be non-negative");
  t.cost = t.loss == LossKind::SharpeCost ? config.cost_bps * 1e-4 : 0.0;
  t.seed = config.seed;
  t.workers = config.workers;
  t.random_search_iters = config.search_iters;
  t.max_epochs = config.max_epochs;
  t.patience = config.patience;
  if (!config.learning_rates.empty()) t.grid.learning_rate = config.learning_rates;
  if (!config.hidden_sizes.empty()) t.grid.hidden_size = config.hidden_sizes;
  if (!config.minibatch_sizes.empty()) t.grid.minibatch_size = config.minibatch_sizes;
  if (is_learned(sc.strategy)) t.validate();
  return sc;
}

json summary_json(const MarketPanel& panel, std::size_t dropped) {
  json assets = json::array();
  for (const auto& a : panel.assets) {
    std::size_t valid = 0;
    for (const auto& f : panel.features) {
      if (f.asset_id != a.asset_id) continue;
      for (auto v : f.valid) valid += v;
    }
    assets.push_back({{"asset_id", a.asset_id},
                      {"first_date", a.dates.front().to_string()},
                      {"last_date", a.dates.back().to_string()},
                      {"rows", a.size()},
                      {"valid_feature_rows", valid}});
  }
  return {{"assets", assets},
          {"asset_count", panel.size()},
          {"first_date", panel.first_date().to_string()},
          {"last_date", panel.last_date().to_string()},
          {"dropped_rows", dropped}};
}

void write_walk_forward(const std::filesystem::path& out, const WalkForwardResult& wf) {
  write_json(out / "manifest.json", wf.manifest());
  for (const auto& b : wf.blocks) {
    if (b.search) {
      write_json(out / "checkpoints" / ("block_" + b.start.to_string() + ".json"), b.search->fit.params.to_json());
    }
  }
}

}  // namespace

void cmd_ingest(const RunConfig& config, std::ostream& log) {
  std::size_t dropped = 0;
  const auto panel = load_panel(config, &dropped);
  csv::write_file(config.out / "features.csv", format_features_csv(panel.features));
  csv::write_file(config.out / "returns.csv", format_returns_csv(panel.returns));
  csv::write_file(config.out / "vol.csv", format_vol_csv(panel.vols));
  write_json(config.out / "summary.json", summary_json(panel, dropped));
  log << "ingested " << panel.size() << " assets, " << panel.first_date().to_string() << " to "
      << panel.last_date().to_string() << ", " << dropped << " dropped rows\n";
}

void cmd_synth(const RunConfig& config, std::ostream& log) {
  SynthConfig sc;
  sc.trend_assets = config.trend_assets;
  sc.noise_assets = config.noise_assets;
  sc.length = config.length;
  sc.seed = config.seed;
  const auto assets = generate_synthetic(sc);
  csv::write_file(config.out / "prices.csv", format_price_csv(assets, config.schema));
  write_json(config.out / "synth_manifest.json",
             {{"generator", sc.to_json()}, {"schema", std::string(to_string(config.schema))}});
  log << "wrote " << assets.size() << " synthetic assets of " << sc.length << " days\n";
}

void cmd_backtest(const RunConfig& config, std::ostream& log) {
  const auto sc = strategy_config(config);
  const auto panel = load_panel(config);
  StrategyRun run;
  try {
    run = run_strategy(panel, sc);
  } catch (const TrainingError& e) {
    write_json(config.out / "manifest.json", {{"seed", config.seed},
                                              {"config", sc.train.to_json()},
                                              {"error", e.what()},
                                              {"diagnostics", e.diagnostics()}});
    throw;
  }
  if (run.walk_forward) write_walk_forward(config.out, *run.walk_forward);

  EvaluationOptions opts;
  opts.cost = config.cost_bps * 1e-4;
  opts.rescale.mode = config.expost_rescale ? RescaleMode::ExPost : RescaleMode::Causal;
  opts.drawdown = config.additive_drawdown ? DrawdownMode::Additive : DrawdownMode::Compounded;
  const auto ev = evaluate(panel, run.positions, run.boundaries, opts);

  const std::map<std::string, PerfReport> raw{{run.name, ev.raw}};
  csv::write_file(config.out / "report_raw.csv", format_reports_csv(raw));
  write_json(config.out / "report_raw.json", reports_to_json(raw));
  if (ev.rescaled_report) {
    const std::map<std::string, PerfReport> rescaled{{run.name, *ev.rescaled_report}};
    csv::write_file(config.out / "report_rescaled.csv", format_reports_csv(rescaled));
    write_json(config.out / "report_rescaled.json", reports_to_json(rescaled));
    csv::write_file(config.out / "cumulative.csv", format_cumulative_csv(ev.rescaled));
  }
  const std::map<std::string, CrossValReport> cv{{run.name, ev.crossval}};
  csv::write_file(config.out / "crossval.csv", format_crossval_csv(cv));
  write_json(config.out / "crossval.json", {{run.name, ev.crossval.to_json()}});
  csv::write_file(config.out / "positions.csv", format_positions_csv(run.positions));
  csv::write_file(config.out / "portfolio.csv", format_portfolio_csv(ev.net.portfolio));
  csv::write_file(config.out / "turnover.csv", format_turnover_csv(ev.turnover));
  csv::write_file(config.out / "cost_sweep.csv", format_cost_sweep_csv(ev.sweep));

  log << run.name << ": " << ev.raw.days << " days, Sharpe "
      << (ev.raw.sharpe ? csv::format(*ev.raw.sharpe) : std::string("n/a")) << ", average turnover "
      << csv::format(ev.turnover.mean()) << "\n";
}

void cmd_report(const RunConfig& config, std::ostream& log) {
  if (config.data.empty()) throw std::invalid_argument("--data is required");
  const auto text = csv::read_file(config.data);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty returns file", 1);
  const auto header = csv::split(line);
  if (header.size() < 2 || header[0] != "date") throw DataError("expected a 'date,return' header", 1);
  std::vector<Date> dates;
  std::vector<double> returns;
  for (std::size_t row = 2; std::getline(in, line); ++row) {
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split(line);
    if (fields.size() < 2) throw DataError("expected at least two fields", row);
    try {
      dates.push_back(Date::parse(fields[0]));
    } catch (const std::invalid_argument&) {
      throw DataError("bad date '" + std::string(fields[0]) + "'", row);
    }
    const auto r = csv::parse_double(fields[1]);
    if (!r) throw DataError("bad return '" + std::string(fields[1]) + "'", row);
    returns.push_back(*r);
  }
  if (returns.size() < 2) throw DataError("need at least two returns");
  const auto mode = config.additive_drawdown ? DrawdownMode::Additive : DrawdownMode::Compounded;
  const std::map<std::string, PerfReport> reports{{config.strategy, summarise(returns, mode)}};
  csv::write_file(config.out / "report.csv", format_reports_csv(reports));
  write_json(config.out / "report.json", reports_to_json(reports));

  const auto edges = block_boundaries(dates.front(), dates.back(), config.block_years);
  std::vector<PerfReport> blocks;
  std::size_t first = 0;
  for (std::size_t k = 0; k <= edges.size(); ++k) {
    std::size_t last = first;
    while (last < dates.size() && (k == edges.size() || dates[last] < edges[k])) ++last;
    if (last - first >= 2) blocks.push_back(summarise(std::span<const double>(returns).subspan(first, last - first), mode));
    first = last;
  }
  const std::map<std::string, CrossValReport> cv{{config.strategy, crossval_report(blocks)}};
  csv::write_file(config.out / "crossval.csv", format_crossval_csv(cv));
  log << config.strategy << ": " << returns.size() << " days over " << blocks.size() << " blocks\n";
}

int run_command(const std::string& command, const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    if (command == "ingest") {
      cmd_ingest(config, log);
    } else if (command == "synth") {
      cmd_synth(config, log);
    } else if (command == "backtest") {
      cmd_backtest(config, log);
    } else if (command == "report") {
      cmd_report(config, log);
    } else {
      err << "error: unknown command '" << command << "'\n";
      return kExitUsage;
    }
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const TrainingError& e) {
    err << "training error: " << e.what() << "\n";
    return kExitTrainingError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitOk;
}

}  // namespace dmn
