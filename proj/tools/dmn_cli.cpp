#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dmn/commands.h"

namespace {

void add_common(CLI::App* cmd, dmn::RunConfig& c, std::string& schema) {
  cmd->add_option("--data", c.data, "input CSV");
  cmd->add_option("--schema", schema, "CSV layout: long (date,asset_id,price) or wide (date,<asset>...)")
      ->check(CLI::IsMember({"long", "wide"}));
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--seed", c.seed, "master random seed");
}

}  // namespace

int main(int argc, char** argv) {
  dmn::RunConfig c;
  std::string schema = "long";

  CLI::App app{"Deep momentum networks: ingest, train, backtest and report"};
  app.set_config("--config", "", "INI file of option defaults; command-line flags take precedence");
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand("ingest", "build features, returns and ex-ante volatility");
  add_common(ingest, c, schema);
  ingest->add_flag("!--no-winsorise", c.winsorise, "skip price winsorisation");

  auto* synth = app.add_subcommand("synth", "generate a synthetic trend/noise dataset");
  add_common(synth, c, schema);
  synth->add_option("--assets", c.trend_assets, "trend-regime assets");
  synth->add_option("--noise-assets", c.noise_assets, "zero-drift assets");
  synth->add_option("--length", c.length, "business days per asset");

  auto* backtest = app.add_subcommand("backtest", "run one strategy out of sample and write its reports");
  add_common(backtest, c, schema);
  backtest->add_option("--strategy", c.strategy, "long_only | sgn | macd | linear | mlp | wavenet | lstm");
  backtest->add_option("--loss", c.loss, "mse | binary | returns | sharpe | sharpe_cost");
  backtest->add_option("--cost-bps", c.cost_bps, "transaction cost c in basis points");
  backtest->add_option("--block-years", c.block_years, "years between recalibrations");
  backtest->add_option("--workers", c.workers, "parallel random-search candidates");
  backtest->add_option("--search-iters", c.search_iters, "random-search draws per block");
  backtest->add_option("--max-epochs", c.max_epochs, "training epochs per candidate");
  backtest->add_option("--patience", c.patience, "epochs without validation improvement before stopping");
  backtest->add_option("--learning-rates", c.learning_rates, "learning-rate grid override")->delimiter(',');
  backtest->add_option("--hidden-sizes", c.hidden_sizes, "hidden-size grid override")->delimiter(',');
  backtest->add_option("--minibatch-sizes", c.minibatch_sizes, "minibatch-size grid override")->delimiter(',');
  backtest->add_flag("--expost-rescale", c.expost_rescale, "whole-sample portfolio rescaling (non-causal)");
  backtest->add_flag("--additive-drawdown", c.additive_drawdown, "drawdown on cumulative summed returns");
  backtest->add_flag("!--no-winsorise", c.winsorise, "skip price winsorisation");
  backtest->add_flag("--macd-average", c.macd_average, "average the three MACD signals instead of summing");

  auto* report = app.add_subcommand("report", "performance report for a date,return series");
  add_common(report, c, schema);
  report->add_option("--strategy", c.strategy, "label for the report row");
  report->add_option("--block-years", c.block_years, "years per cross-validation block");
  report->add_flag("--additive-drawdown", c.additive_drawdown);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dmn::kExitUsage;
  }
  c.schema = dmn::parse_schema(schema);
  const auto* chosen = app.get_subcommands().front();
  return dmn::run_command(chosen->get_name(), c, std::cout, std::cerr);
}
