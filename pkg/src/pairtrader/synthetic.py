"""Deterministic synthetic sector for demos and end-to-end tests.

Writes ten ticker CSVs on a weekday calendar (a 740-day fit period followed
by a 250-day evaluation period) plus a ready-to-run pipeline config.  Eight
tickers are independent geometric random walks; one pair is engineered to be
cointegrated: COBALT tracks twice IRON plus a quickly mean-reverting AR(1)
spread, so the scan should single it out and its z-score should cross both
bands during the evaluation period.

The default seed was picked so that, at the 0.05 threshold with the default
0.02 near-miss margin, the engineered pair is the only selection.
"""

from __future__ import annotations

import argparse
import csv
import json
from datetime import date, timedelta
from pathlib import Path

import numpy as np

DEFAULT_SEED = 0
TRAIN_DAYS = 740
TEST_DAYS = 250

PAIR_TICKERS = ("IRON", "COBALT")
NOISE_TICKERS = (
    "AMBER", "BASALT", "CEDAR", "DUNE", "EMBER", "FLINT", "GRANITE", "HOLLY",
)


def weekday_calendar(start: date, count: int) -> tuple[date, ...]:
    """The first ``count`` weekdays on or after ``start``."""
    days = []
    current = start
    while len(days) < count:
        if current.weekday() < 5:
            days.append(current)
        current += timedelta(days=1)
    return tuple(days)


def build_sector(seed: int = DEFAULT_SEED) -> dict[str, np.ndarray]:
    """Price paths per ticker, ordered on the shared weekday calendar."""
    rng = np.random.default_rng(seed)
    n = TRAIN_DAYS + TEST_DAYS
    prices: dict[str, np.ndarray] = {}

    base = rng.uniform(40.0, 400.0, size=len(NOISE_TICKERS))
    for ticker, p0 in zip(NOISE_TICKERS, base):
        steps = rng.normal(0.0, 0.02, size=n)
        steps[0] = 0.0
        prices[ticker] = p0 * np.exp(np.cumsum(steps))

    steps = rng.normal(0.0, 0.012, size=n)
    steps[0] = 0.0
    iron = 100.0 * np.exp(np.cumsum(steps))

    spread = np.empty(n)
    innovations = rng.normal(0.0, 2.0, size=n)
    spread[0] = innovations[0]
    for t in range(1, n):
        spread[t] = 0.5 * spread[t - 1] + innovations[t]

    cobalt = 2.0 * iron + spread
    if cobalt.min() <= 0:
        raise ValueError("engineered pair produced a non-positive price")
    prices[PAIR_TICKERS[0]] = iron
    prices[PAIR_TICKERS[1]] = cobalt
    return prices


def write_sector(out_dir, seed: int = DEFAULT_SEED, sector: str = "metals") -> Path:
    """Write ticker CSVs and a pipeline config; returns the config path."""
    out = Path(out_dir)
    data_dir = out / "data"
    data_dir.mkdir(parents=True, exist_ok=True)

    calendar = weekday_calendar(date(2018, 1, 1), TRAIN_DAYS + TEST_DAYS)
    prices = build_sector(seed)

    tickers = sorted(prices)
    for ticker in tickers:
        with open(data_dir / f"{ticker}.csv", "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["Date", "Close"])
            for day, close in zip(calendar, prices[ticker]):
                writer.writerow([day.isoformat(), f"{close:.2f}"])

    config = {
        "sectors": {
            sector: [
                {"ticker": ticker, "csv": f"data/{ticker}.csv"} for ticker in tickers
            ]
        },
        "train_window": [calendar[0].isoformat(), calendar[TRAIN_DAYS - 1].isoformat()],
        "test_window": [calendar[TRAIN_DAYS].isoformat(), calendar[-1].isoformat()],
        "out_dir": "runs",
    }
    config_path = out / "config.json"
    with open(config_path, "w", encoding="utf-8") as handle:
        json.dump(config, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return config_path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Generate the bundled synthetic demo sector."
    )
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    args = parser.parse_args(argv)
    config_path = write_sector(args.out, seed=args.seed)
    print(f"wrote {config_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
