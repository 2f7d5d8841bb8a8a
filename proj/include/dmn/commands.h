#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dmn/market_data.h"

namespace dmn {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitTrainingError = 3;

struct RunConfig {
  std::filesystem::path data;
  CsvSchema schema = CsvSchema::Long;
  std::string strategy = "sgn";
  std::string loss = "sharpe";
  double cost_bps = 0.0;
  int block_years = 5;
  std::uint64_t seed = 42;
  std::size_t workers = 1;
  std::filesystem::path out = "out";

  // Training.
  std::size_t search_iters = 50;
  std::size_t max_epochs = 100;
  std::size_t patience = 25;
  /// Search-grid overrides; empty keeps the default grid.
  std::vector<double> learning_rates;
  std::vector<std::size_t> hidden_sizes;
  std::vector<std::size_t> minibatch_sizes;

  // Evaluation.
  bool expost_rescale = false;
  bool additive_drawdown = false;
  bool winsorise = true;
  bool macd_average = false;

  // Synthetic data.
  std::size_t trend_assets = 10;
  std::size_t noise_assets = 0;
  std::size_t length = 2520;
};

/// Each command writes into config.out and reports progress on `log`. Errors propagate as
/// exceptions; run_command maps them to exit codes.
void cmd_ingest(const RunConfig& config, std::ostream& log);
void cmd_synth(const RunConfig& config, std::ostream& log);
void cmd_backtest(const RunConfig& config, std::ostream& log);
/// Summarises a `date,return[,...]` series given by config.data.
void cmd_report(const RunConfig& config, std::ostream& log);

/// Runs `command` ("ingest", "synth", "backtest" or "report"), printing any error to `err`.
/// Returns 0 on success, 1 for usage errors, 2 for data errors and 3 for training errors.
int run_command(const std::string& command, const RunConfig& config, std::ostream& log, std::ostream& err);

}  // namespace dmn
