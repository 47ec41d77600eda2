import json
from decimal import Decimal
from pathlib import Path

import numpy as np
import pytest

from pairtrader.backtest import PairSummary, ledger_rows_from_csv
from pairtrader.cli import RunConfig, main
from pairtrader.pairscan import PValueMatrix
from pairtrader.signalgen import TradingFrame
from pairtrader.synthetic import PAIR_TICKERS


def run(*argv):
    return main([str(a) for a in argv])


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


@pytest.fixture(scope="module")
def pipeline(synth_dir, tmp_path_factory):
    """One full scan+analyze+backtest+report run over the synthetic sector."""
    out = tmp_path_factory.mktemp("run")
    config = synth_dir / "config.json"
    assert run("scan", "--config", config, "--sector", "metals", "--out", out) == 0
    assert run("analyze", "--config", config, "--pair", "COBALT,IRON", "--out", out) == 0
    assert run("backtest", "--config", config, "--pair", "COBALT,IRON",
               "--svg", "--out", out) == 0
    assert run("report", "--config", config, "--out", out) == 0
    return out


class TestScan:
    def test_selects_exactly_engineered_pair(self, pipeline):
        payload = read_json(pipeline / "metals" / "scan" / "selected_pairs.json")
        assert len(payload["pairs"]) == 1
        selected = payload["pairs"][0]
        assert {selected["predictor_ticker"], selected["target_ticker"]} == set(PAIR_TICKERS)
        assert selected["coint_p"] < 0.05
        assert selected["near_threshold"] is False

    def test_pvalue_matrix_has_45_cells(self, pipeline):
        payload = read_json(pipeline / "metals" / "scan" / "pvalue_matrix.json")
        assert len(payload["pairs"]) == 45
        matrix = PValueMatrix.from_csv(pipeline / "metals" / "scan" / "pvalue_matrix.csv")
        assert np.isfinite(matrix.values).sum() == 45

    def test_correlation_matrix_shape(self, pipeline):
        lines = (pipeline / "metals" / "scan" / "correlation_matrix.csv").read_text().splitlines()
        assert len(lines) == 11
        header = lines[0].split(",")
        assert len(header) == 11

    def test_single_ticker_sector_is_config_error(self, synth_dir, tmp_path):
        config = json.loads((synth_dir / "config.json").read_text())
        config["sectors"]["tiny"] = config["sectors"]["metals"][:1]
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        # Paths in the rewritten config stay relative to synth_dir's layout,
        # so point them back at the real CSVs.
        config["sectors"]["tiny"][0]["csv"] = str(synth_dir / "data" / "AMBER.csv")
        path.write_text(json.dumps(config))
        assert run("scan", "--config", path, "--sector", "tiny", "--out", tmp_path / "o") == 1

    def test_unknown_sector_is_config_error(self, synth_dir, tmp_path):
        assert run("scan", "--config", synth_dir / "config.json",
                   "--sector", "nope", "--out", tmp_path) == 1


class TestAnalyze:
    def test_artifacts_exist_and_parse(self, pipeline):
        base = pipeline / "metals" / "pairs" / "COBALT-IRON" / "analysis"
        report = read_json(base / "ols_report.json")
        assert report["predictor"] == "COBALT"
        assert report["target"] == "IRON"
        assert report["ols"]["cond_no"] == 1.0
        assert 0.0 < report["ols"]["hedge_ratio"] < 1.0
        text = (base / "ols_summary.txt").read_text()
        assert "R-squared (uncentered):" in text
        assert "IRON (asset2)" in text
        adf = read_json(base / "residual_adf.json")
        assert adf["adf"]["deterministic"] == "constant"
        assert adf["verdict"] in ("stationary at 1%", "stationary at 5%",
                                  "stationary at 10%", "not stationary")

    def test_residuals_csv_matches_training_length(self, pipeline):
        base = pipeline / "metals" / "pairs" / "COBALT-IRON" / "analysis"
        rows = (base / "residuals.csv").read_text().splitlines()
        report = read_json(base / "ols_report.json")
        assert len(rows) - 1 == report["ols"]["n_obs"] == 740

    def test_missing_ticker_diagnostic(self, synth_dir, tmp_path, capsys):
        code = run("analyze", "--config", synth_dir / "config.json",
                   "--pair", "COBALT,UNOBTANIUM", "--out", tmp_path)
        assert code == 1
        assert "UNOBTANIUM" in capsys.readouterr().err

    def test_pair_order_does_not_matter(self, synth_dir, tmp_path):
        out = tmp_path / "o"
        assert run("analyze", "--config", synth_dir / "config.json",
                   "--pair", "IRON,COBALT", "--out", out) == 0
        assert (out / "metals" / "pairs" / "COBALT-IRON" / "analysis").is_dir()


class TestBacktest:
    def test_both_directions_triggered_per_leg(self, pipeline):
        triggers = read_json(
            pipeline / "metals" / "pairs" / "COBALT-IRON" / "backtest" / "triggers.json"
        )
        for leg in ("asset1", "asset2"):
            actions = {t["action"] for t in triggers if t["leg"] == leg}
            assert actions & {"open_long", "flip_to_long"}
            assert actions & {"open_short", "flip_to_short"}

    def test_frame_csv_round_trips(self, pipeline):
        base = pipeline / "metals" / "pairs" / "COBALT-IRON" / "backtest"
        frame = TradingFrame.from_csv(base / "trading_frame.csv",
                                      ticker1="COBALT", ticker2="IRON")
        frame.validate()
        assert len(frame) == 250
        rewritten = base.parent / "frame_copy.csv"
        frame.to_csv(rewritten)
        assert rewritten.read_bytes() == (base / "trading_frame.csv").read_bytes()

    def test_ledger_identity_from_csv(self, pipeline):
        base = pipeline / "metals" / "pairs" / "COBALT-IRON" / "backtest"
        rows = ledger_rows_from_csv(base / "ledger.csv")
        assert len(rows) == 250
        for row in rows:
            assert row.total == row.cash1 + row.cash2 + row.holdings1 + row.holdings2

    def test_summary_consistent_with_ledger(self, pipeline):
        base = pipeline / "metals" / "pairs" / "COBALT-IRON" / "backtest"
        summary = PairSummary.from_json_dict(read_json(base / "summary.json"))
        rows = ledger_rows_from_csv(base / "ledger.csv")
        assert summary.profit == rows[-1].total - Decimal("200000")

    def test_svg_artifacts_written(self, pipeline):
        base = pipeline / "metals" / "pairs" / "COBALT-IRON" / "backtest"
        for name in ("z_band.svg", "portfolio_value.svg"):
            text = (base / name).read_text()
            assert text.startswith("<svg ") and "<polyline" in text

    def test_engineered_pair_is_profitable(self, pipeline):
        base = pipeline / "metals" / "pairs" / "COBALT-IRON" / "backtest"
        summary = PairSummary.from_json_dict(read_json(base / "summary.json"))
        assert summary.profit > 0
        assert summary.annual_return > 0

    def test_band_never_crossed_means_no_trades(self, synth_dir, tmp_path):
        # Ratio wiggles during training (so the fit has variance) but sits
        # exactly on the training mean throughout the test window: z stays
        # at 0, no triggers fire, and the return is 0.00%.
        base_config = json.loads((synth_dir / "config.json").read_text())
        train_days = 740
        iron = [line.split(",") for line in
                (synth_dir / "data" / "IRON.csv").read_text().splitlines()[1:]]
        data = tmp_path / "data"
        data.mkdir()
        a_rows, b_rows = ["Date,Close"], ["Date,Close"]
        for i, (day, px) in enumerate(iron):
            a = float(px) + 100.0
            k = 2.0 + (0.01 if i % 2 else -0.01) if i < train_days else 2.0
            a_rows.append(f"{day},{a:.4f}")
            b_rows.append(f"{day},{a / k:.10f}")
        (data / "AAA.csv").write_text("\n".join(a_rows) + "\n")
        (data / "BBB.csv").write_text("\n".join(b_rows) + "\n")
        config = {
            "sectors": {"quiet": [
                {"ticker": "AAA", "csv": "data/AAA.csv"},
                {"ticker": "BBB", "csv": "data/BBB.csv"},
            ]},
            "train_window": base_config["train_window"],
            "test_window": base_config["test_window"],
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        out = tmp_path / "o"
        assert run("backtest", "--config", path, "--pair", "AAA,BBB", "--out", out) == 0
        backtest_dir = out / "quiet" / "pairs" / "AAA-BBB" / "backtest"
        assert read_json(backtest_dir / "triggers.json") == []
        summary = PairSummary.from_json_dict(read_json(backtest_dir / "summary.json"))
        assert summary.profit == 0
        assert str(summary.annual_return) == "0.00"

    def test_degenerate_ratio_is_numeric_error(self, synth_dir, tmp_path):
        # A pair proportional to itself has a constant ratio: exit code 3.
        data = tmp_path / "data"
        data.mkdir()
        src = (synth_dir / "data" / "IRON.csv").read_text().splitlines()
        (data / "P.csv").write_text("\n".join(src) + "\n")
        doubled = [src[0]]
        for line in src[1:]:
            day, px = line.split(",")
            doubled.append(f"{day},{float(px) * 2:.2f}")
        (data / "Q.csv").write_text("\n".join(doubled) + "\n")
        base_config = json.loads((synth_dir / "config.json").read_text())
        config = {
            "sectors": {"clone": [
                {"ticker": "P", "csv": "data/P.csv"},
                {"ticker": "Q", "csv": "data/Q.csv"},
            ]},
            "train_window": base_config["train_window"],
            "test_window": base_config["test_window"],
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        assert run("backtest", "--config", path, "--pair", "P,Q",
                   "--out", tmp_path / "o") == 3


class TestReport:
    def test_sector_table_and_summary(self, pipeline):
        table = (pipeline / "report" / "sector_metals.csv").read_text().splitlines()
        assert table[0] == "Stock Pair,Init Investment,Profit,Annual Return"
        assert table[1].startswith("COBALT - IRON,200000,")
        summary = (pipeline / "report" / "summary.csv").read_text().splitlines()
        assert summary[0] == "Sector,No of Pairs,Positive Return Pairs,Max Ret"
        assert summary[1].startswith("metals,1,")

    def test_totals_agree_with_pair_summaries(self, pipeline):
        pair_summary = PairSummary.from_json_dict(read_json(
            pipeline / "metals" / "pairs" / "COBALT-IRON" / "backtest" / "summary.json"
        ))
        sector = read_json(pipeline / "report" / "sector_metals.json")
        assert sector["rows"][0]["profit"] == str(pair_summary.profit)
        assert sector["max_return"] == str(pair_summary.annual_return)
        cross = read_json(pipeline / "report" / "summary.json")
        assert cross[0]["max_return"] == str(pair_summary.annual_return)

    def test_empty_artifacts_is_data_error(self, synth_dir, tmp_path):
        assert run("report", "--config", synth_dir / "config.json",
                   "--out", tmp_path / "empty") == 2


class TestDeterminism:
    def test_rerun_is_byte_identical(self, synth_dir, pipeline, tmp_path):
        config = synth_dir / "config.json"
        second = tmp_path / "second"
        assert run("scan", "--config", config, "--sector", "metals", "--out", second) == 0
        assert run("backtest", "--config", config, "--pair", "COBALT,IRON",
                   "--svg", "--out", second) == 0
        assert run("report", "--config", config, "--out", second) == 0

        for rel in (
            Path("metals/scan/correlation_matrix.csv"),
            Path("metals/scan/pvalue_matrix.csv"),
            Path("metals/scan/pvalue_matrix.json"),
            Path("metals/scan/selected_pairs.json"),
            Path("metals/pairs/COBALT-IRON/backtest/trading_frame.csv"),
            Path("metals/pairs/COBALT-IRON/backtest/triggers.json"),
            Path("metals/pairs/COBALT-IRON/backtest/ledger.csv"),
            Path("metals/pairs/COBALT-IRON/backtest/summary.json"),
            Path("metals/pairs/COBALT-IRON/backtest/z_band.svg"),
            Path("metals/pairs/COBALT-IRON/backtest/portfolio_value.svg"),
            Path("report/sector_metals.csv"),
            Path("report/summary.csv"),
            Path("report/summary.json"),
        ):
            assert (pipeline / rel).read_bytes() == (second / rel).read_bytes(), rel


class TestConfigSurface:
    def test_usage_error_without_config(self):
        assert run("scan", "--sector", "metals") == 1

    def test_unknown_command_is_usage_error(self):
        assert run("frobnicate") == 1

    def test_missing_config_file(self, tmp_path):
        assert run("scan", "--config", tmp_path / "nope.json", "--sector", "s") == 1

    def test_env_var_sets_out_dir(self, synth_dir, tmp_path, monkeypatch):
        target = tmp_path / "env_out"
        monkeypatch.setenv("PAIRTRADER_OUT", str(target))
        assert run("scan", "--config", synth_dir / "config.json", "--sector", "metals") == 0
        assert (target / "metals" / "scan" / "selected_pairs.json").exists()

    def test_flag_overrides_threshold(self, synth_dir, tmp_path):
        out = tmp_path / "strict"
        assert run("scan", "--config", synth_dir / "config.json", "--sector", "metals",
                   "--threshold", "1e-40", "--near-eps", "0", "--out", out) == 0
        payload = read_json(out / "metals" / "scan" / "selected_pairs.json")
        assert payload["pairs"] == []

    def test_capital_override_scales_summary(self, synth_dir, tmp_path):
        out = tmp_path / "cap"
        assert run("backtest", "--config", synth_dir / "config.json",
                   "--pair", "IRON,COBALT", "--capital", "200000", "--out", out) == 0
        summary = read_json(out / "metals" / "pairs" / "COBALT-IRON"
                            / "backtest" / "summary.json")
        assert summary["initial_investment"] == "400000"

    def test_invalid_window_ordering_rejected(self, synth_dir, tmp_path):
        assert run("scan", "--config", synth_dir / "config.json", "--sector", "metals",
                   "--train-end", "2021-12-31", "--out", tmp_path) == 1

    def test_config_invariants(self, synth_dir):
        config = RunConfig.from_json(synth_dir / "config.json")
        assert config.train_window[1] < config.test_window[0]
        assert config.z_lower < 0 < config.z_upper
        assert config.coint_threshold == 0.05
