"""Shared fixtures: quick series builders and the synthetic demo sector."""

from datetime import date, timedelta

import pytest

from pairtrader.marketdata import PriceSeries
from pairtrader.synthetic import write_sector


def make_series(ticker, closes, start=date(2021, 1, 1)):
    """PriceSeries on consecutive calendar days starting at ``start``."""
    dates = tuple(start + timedelta(days=i) for i in range(len(closes)))
    return PriceSeries(ticker=ticker, dates=dates, closes=tuple(float(c) for c in closes))


@pytest.fixture(scope="session")
def synth_dir(tmp_path_factory):
    """Synthetic ten-ticker sector with one engineered cointegrated pair."""
    out = tmp_path_factory.mktemp("synth")
    write_sector(out)
    return out
