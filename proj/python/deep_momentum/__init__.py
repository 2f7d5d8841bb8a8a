"""Deep momentum networks for time-series momentum strategies."""

from ._core import (
    AssetSeries,
    DataError,
    TrainingError,
    backtest,
    ewm_mean,
    ewm_std,
    format_price_csv,
    macd_half_life,
    macd_indicator,
    max_drawdown,
    parse_price_csv,
    phi,
    prepare_features,
    run_command,
    sharpe_loss,
    summarise,
    synthetic,
    winsorise,
)

__all__ = [
    "AssetSeries",
    "DataError",
    "TrainingError",
    "backtest",
    "ewm_mean",
    "ewm_std",
    "format_price_csv",
    "macd_half_life",
    "macd_indicator",
    "max_drawdown",
    "parse_price_csv",
    "phi",
    "prepare_features",
    "run_command",
    "sharpe_loss",
    "summarise",
    "synthetic",
    "winsorise",
]
