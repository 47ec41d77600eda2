"""Daily close-price ingestion, validation, alignment, and windowing.

One CSV file per ticker (common finance-site export shape: a ``Date`` column
plus ``Close`` and optionally ``Adj Close``).  Alignment across tickers is a
strict inner join on dates: non-common trading days are dropped, never
forward-filled.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from datetime import date

import numpy as np

from .errors import (
    DuplicateDate,
    DuplicateTicker,
    EmptyIntersection,
    EmptySeries,
    EmptyWindow,
    MissingColumn,
    NonPositivePrice,
    SeriesTooShort,
)

logger = logging.getLogger(__name__)

#: Close-column preference when several candidates exist in a CSV.
CLOSE_COLUMN_PREFERENCE = ("Close", "Adj Close")

#: Cell contents treated as "no price" and dropped with a warning.
_MISSING_TOKENS = frozenset({"", "na", "n/a", "nan", "null", "none"})


@dataclass(frozen=True)
class PriceSeries:
    """Date-ordered daily closes for one ticker.

    Dates are strictly increasing and every close is finite and positive;
    instances are immutable and safe to share across threads.
    """

    ticker: str
    dates: tuple[date, ...]
    closes: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.dates) != len(self.closes):
            raise ValueError("dates and closes must have equal length")
        if not self.dates:
            raise EmptySeries(f"{self.ticker}: no observations")
        for prev, nxt in zip(self.dates, self.dates[1:]):
            if nxt <= prev:
                raise DuplicateDate(
                    f"{self.ticker}: dates not strictly increasing at {nxt}"
                )
        for d, c in zip(self.dates, self.closes):
            if not math.isfinite(c) or c <= 0.0:
                raise NonPositivePrice(f"{self.ticker}: close {c!r} on {d}")

    def __len__(self) -> int:
        return len(self.dates)

    def closes_array(self) -> np.ndarray:
        return np.asarray(self.closes, dtype=float)

    def mean_close(self) -> float:
        return float(np.mean(self.closes_array()))


@dataclass(frozen=True)
class ReturnSeries:
    """Daily simple returns ``r_t = p_t / p_{t-1} - 1`` for one ticker."""

    ticker: str
    dates: tuple[date, ...]
    returns: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.dates)

    def returns_array(self) -> np.ndarray:
        return np.asarray(self.returns, dtype=float)


@dataclass(frozen=True)
class AlignedPanel:
    """Close prices for several tickers on one common calendar.

    ``closes[i, j]`` is the close of ``tickers[j]`` on ``dates[i]``.  Every
    cell is populated (inner-join alignment).
    """

    tickers: tuple[str, ...]
    dates: tuple[date, ...]
    closes: np.ndarray

    def __post_init__(self) -> None:
        closes = np.asarray(self.closes, dtype=float)
        if closes.shape != (len(self.dates), len(self.tickers)):
            raise ValueError("closes shape does not match dates x tickers")
        closes.setflags(write=False)
        object.__setattr__(self, "closes", closes)

    def __len__(self) -> int:
        return len(self.dates)

    def column(self, ticker: str) -> PriceSeries:
        """Extract one ticker as a PriceSeries on the panel calendar."""
        j = self.tickers.index(ticker)
        return PriceSeries(ticker, self.dates, tuple(float(c) for c in self.closes[:, j]))


def load_csv(path, ticker: str, close_column: str | None = None) -> PriceSeries:
    """Load one ticker's daily closes from a CSV file.

    The file must have a header row with a ``Date`` column (ISO-8601
    ``YYYY-MM-DD``) and a close column; ``Close`` is preferred over
    ``Adj Close`` unless ``close_column`` names one explicitly.  Rows whose
    date or close cannot be parsed (holiday gaps, vendor NA markers) are
    dropped with a logged count; a close that parses to a non-positive or
    non-finite number is an error.  Rows may appear in any date order.
    """
    with open(path, newline="", encoding="utf-8-sig") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames
        if header is None:
            raise EmptySeries(f"{path}: file is empty")
        if "Date" not in header:
            raise MissingColumn(f"{path}: no 'Date' column (found {header})")
        if close_column is not None:
            if close_column not in header:
                raise MissingColumn(f"{path}: no {close_column!r} column")
            close_col = close_column
        else:
            for candidate in CLOSE_COLUMN_PREFERENCE:
                if candidate in header:
                    close_col = candidate
                    break
            else:
                raise MissingColumn(
                    f"{path}: none of {CLOSE_COLUMN_PREFERENCE} present (found {header})"
                )

        rows: list[tuple[date, float]] = []
        dropped = 0
        for line_no, row in enumerate(reader, start=2):
            raw_date = (row.get("Date") or "").strip()
            raw_close = (row.get(close_col) or "").strip()
            if raw_close.lower() in _MISSING_TOKENS:
                dropped += 1
                continue
            try:
                day = date.fromisoformat(raw_date)
            except ValueError:
                dropped += 1
                continue
            try:
                close = float(raw_close)
            except ValueError:
                dropped += 1
                continue
            if math.isnan(close):
                dropped += 1
                continue
            if not math.isfinite(close) or close <= 0.0:
                raise NonPositivePrice(
                    f"{path}:{line_no}: close {raw_close!r} on {day} is not positive"
                )
            rows.append((day, close))

    if dropped:
        logger.warning("%s: dropped %d rows with missing/unparseable cells", path, dropped)
    if not rows:
        raise EmptySeries(f"{path}: no valid rows")

    rows.sort(key=lambda item: item[0])
    for (d1, _), (d2, _) in zip(rows, rows[1:]):
        if d1 == d2:
            raise DuplicateDate(f"{path}: date {d1} appears more than once")

    return PriceSeries(
        ticker=ticker,
        dates=tuple(d for d, _ in rows),
        closes=tuple(c for _, c in rows),
    )


def align_panel(series: list[PriceSeries]) -> AlignedPanel:
    """Inner-join several price series onto their common calendar.

    Panel dates are the intersection of all input date sets, ascending.
    Column order follows ticker order of the input list.
    """
    if len(series) < 2:
        raise ValueError("align_panel needs at least 2 series")
    tickers = [s.ticker for s in series]
    if len(set(tickers)) != len(tickers):
        seen = set()
        dupe = next(t for t in tickers if t in seen or seen.add(t))
        raise DuplicateTicker(f"ticker {dupe!r} appears more than once")

    common = set(series[0].dates)
    for s in series[1:]:
        common &= set(s.dates)
    if not common:
        raise EmptyIntersection(f"no common dates across {tickers}")
    dates = tuple(sorted(common))

    closes = np.empty((len(dates), len(series)), dtype=float)
    for j, s in enumerate(series):
        by_date = dict(zip(s.dates, s.closes))
        closes[:, j] = [by_date[d] for d in dates]

    return AlignedPanel(tickers=tuple(tickers), dates=dates, closes=closes)


def pct_change(p: PriceSeries) -> ReturnSeries:
    """Simple returns ``r_t = p_t / p_{t-1} - 1``; the first day is dropped."""
    if len(p) < 2:
        raise SeriesTooShort(f"{p.ticker}: need >= 2 observations, have {len(p)}")
    closes = p.closes_array()
    rets = closes[1:] / closes[:-1] - 1.0
    return ReturnSeries(
        ticker=p.ticker,
        dates=p.dates[1:],
        returns=tuple(float(r) for r in rets),
    )


def slice_window(s, start: date, end: date):
    """Restrict a PriceSeries or AlignedPanel to ``start <= date <= end``."""
    if start > end:
        raise ValueError(f"window start {start} after end {end}")
    if isinstance(s, PriceSeries):
        kept = [(d, c) for d, c in zip(s.dates, s.closes) if start <= d <= end]
        if not kept:
            raise EmptyWindow(f"{s.ticker}: no observations in [{start}, {end}]")
        return PriceSeries(
            ticker=s.ticker,
            dates=tuple(d for d, _ in kept),
            closes=tuple(c for _, c in kept),
        )
    if isinstance(s, AlignedPanel):
        idx = [i for i, d in enumerate(s.dates) if start <= d <= end]
        if not idx:
            raise EmptyWindow(f"panel: no observations in [{start}, {end}]")
        return AlignedPanel(
            tickers=s.tickers,
            dates=tuple(s.dates[i] for i in idx),
            closes=s.closes[idx, :].copy(),
        )
    raise TypeError(f"cannot window {type(s).__name__}")
