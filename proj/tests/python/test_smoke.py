import json
import math

import pytest

import deep_momentum as dm


def test_spot_values():
    assert dm.phi(math.sqrt(2.0)) == pytest.approx(0.96378, abs=1e-5)
    assert dm.macd_half_life(8) == pytest.approx(5.191, abs=1e-3)
    assert dm.sharpe_loss([0.01, 0.02, -0.01]) == pytest.approx(-8.4852, abs=1e-3)


def test_ewm_matches_explicit_weights():
    x = [math.sin(0.7 * i) + 0.01 * i for i in range(200)]
    alpha = 2.0 / 61.0
    t = len(x) - 1
    w = [(1 - alpha) ** (t - j) for j in range(t + 1)]
    mean = sum(wj * xj for wj, xj in zip(w, x)) / sum(w)
    var = sum(wj * (xj - mean) ** 2 for wj, xj in zip(w, x)) / sum(w)
    assert dm.ewm_mean(x, 60)[-1] == pytest.approx(mean, rel=1e-10)
    assert dm.ewm_std(x, 60)[-1] == pytest.approx(math.sqrt(var), rel=1e-10)
    assert math.isnan(dm.ewm_std(x, 60)[0])


def test_csv_round_trip_and_errors():
    text = "date,asset_id,price\n2020-01-02,A,1.5\n2020-01-03,A,1.25\n"
    assets, dropped = dm.parse_price_csv(text)
    assert dropped == 0
    assert assets[0].asset_id == "A"
    assert assets[0].dates == ["2020-01-02", "2020-01-03"]
    assert dm.format_price_csv(assets) == text
    with pytest.raises(dm.DataError):
        dm.parse_price_csv("date,asset_id,price\n2020-01-02,A\n")


def test_features_and_drawdown():
    assets = dm.synthetic(trend_assets=2, length=600, seed=3)
    panel = dm.prepare_features(assets)
    first = panel[assets[0].asset_id]
    assert len(first["features"]) == len(assets[0])
    assert all(len(row) == 8 for row in first["features"])
    assert first["valid"].index(True) == 313
    assert dm.max_drawdown([0.1, -0.5, 0.2]) == pytest.approx(0.5)
    report = dm.summarise([0.01, -0.02, 0.015, 0.003])
    assert report["days"] == 4
    assert report["MDD"] == pytest.approx(0.02)


def test_backtest_sgn_on_trend_data():
    assets = dm.synthetic(trend_assets=10, length=2520, seed=7)
    out = dm.backtest(assets, strategy="sgn")
    assert out["raw"]["Sharpe"] > 0
    sweep = [s for _, s in out["cost_sweep"]]
    assert all(b <= a for a, b in zip(sweep, sweep[1:]))


def test_run_command_exit_codes(tmp_path):
    code, _, _ = dm.run_command("synth", {"out": str(tmp_path), "assets": 2, "length": 1400})
    assert code == 0
    data = str(tmp_path / "prices.csv")
    code, _, _ = dm.run_command("ingest", {"data": data, "out": str(tmp_path / "ingest")})
    assert code == 0
    assert json.loads((tmp_path / "ingest" / "summary.json").read_text())["asset_count"] == 2
    code, _, err = dm.run_command("ingest", {"data": str(tmp_path / "missing.csv"), "out": str(tmp_path)})
    assert code == 2 and err
    code, _, _ = dm.run_command(
        "backtest",
        {"data": data, "strategy": "linear", "loss": "mse", "learning_rates": [1e300], "search_iters": 2,
         "max_epochs": 3, "patience": 1, "block_years": 2, "out": str(tmp_path / "bt")},
    )
    assert code == 3
    assert "error" in json.loads((tmp_path / "bt" / "manifest.json").read_text())
    with pytest.raises(KeyError):
        dm.run_command("synth", {"bogus": 1})
