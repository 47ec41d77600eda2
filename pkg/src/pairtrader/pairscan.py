"""Sector-wide cointegration scanning and pair-model fitting.

Every unordered ticker pair in a panel gets one Engle-Granger p-value; the
stock with the higher mean close acts as the regressor (it later becomes
asset1, the predictor of the pair model).  Pairs beat the significance
threshold outright or squeak in within a configurable near-threshold margin.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date

import numpy as np

from .econometrics import OlsOriginReport, ols_through_origin
from .errors import ConstantSeries, LengthMismatch, PairTraderError, SeriesTooShort
from .marketdata import AlignedPanel, PriceSeries, slice_window
from .unitroot import AdfResult, adf_test, engle_granger

DEFAULT_THRESHOLD = 0.05
DEFAULT_NEAR_EPS = 0.02


@dataclass(frozen=True)
class PValueMatrix:
    """Engle-Granger p-values for every unordered pair in a panel.

    ``values`` is an (n, n) array with the upper triangle populated and NaN
    elsewhere; ``orderings`` records, cell by cell in row-major upper-triangle
    order, which ticker served as predictor (regressor) and which as target.
    """

    tickers: tuple[str, ...]
    values: np.ndarray
    orderings: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def pvalue(self, a: str, b: str) -> float:
        i, j = self.tickers.index(a), self.tickers.index(b)
        if i > j:
            i, j = j, i
        return float(self.values[i, j])

    def cells(self):
        """Yield (ticker_i, ticker_j, p, predictor, target) per populated cell."""
        n = len(self.tickers)
        k = 0
        for i in range(n):
            for j in range(i + 1, n):
                predictor, target = self.orderings[k]
                yield self.tickers[i], self.tickers[j], float(self.values[i, j]), predictor, target
                k += 1

    def to_csv(self, path) -> None:
        """Matrix CSV with ticker header row/column; unset cells are empty."""
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["", *self.tickers])
            for i, ticker in enumerate(self.tickers):
                row = [ticker]
                for j in range(len(self.tickers)):
                    v = self.values[i, j]
                    row.append(repr(float(v)) if not math.isnan(v) else "")
                writer.writerow(row)

    @classmethod
    def from_csv(cls, path) -> "PValueMatrix":
        """Rebuild tickers and values from a matrix CSV (orderings not stored there)."""
        with open(path, newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
        tickers = tuple(rows[0][1:])
        n = len(tickers)
        values = np.full((n, n), math.nan)
        for i, row in enumerate(rows[1:]):
            for j, cell in enumerate(row[1:]):
                if cell != "":
                    values[i, j] = float(cell)
        return cls(tickers=tickers, values=values, orderings=())

    def to_json_dict(self) -> dict:
        return {
            "tickers": list(self.tickers),
            "pairs": [
                {"ticker_a": a, "ticker_b": b, "p_value": p,
                 "predictor": pred, "target": targ}
                for a, b, p, pred, targ in self.cells()
            ],
        }


@dataclass(frozen=True)
class SelectedPair:
    """One pair admitted to trading: asset1 (predictor) and asset2 (target)."""

    predictor_ticker: str
    target_ticker: str
    coint_p: float
    near_threshold: bool

    def to_json_dict(self) -> dict:
        return {
            "predictor_ticker": self.predictor_ticker,
            "target_ticker": self.target_ticker,
            "coint_p": self.coint_p,
            "near_threshold": self.near_threshold,
        }


@dataclass(frozen=True)
class PairModel:
    """Fitted hedge-ratio model plus the residual stationarity check."""

    pair: SelectedPair
    report: OlsOriginReport
    residual_adf: AdfResult | None
    train_window: tuple[date, date]
    residual_dates: tuple[date, ...]
    verdict: str

    @property
    def hedge_ratio(self) -> float:
        return self.report.hedge_ratio


def order_pair(a: PriceSeries, b: PriceSeries) -> tuple[PriceSeries, PriceSeries]:
    """Pick the predictor leg: higher mean close wins, ties break by ticker."""
    if a.dates != b.dates:
        raise LengthMismatch(f"{a.ticker} and {b.ticker} are not on the same calendar")
    mean_a, mean_b = a.mean_close(), b.mean_close()
    if mean_a > mean_b:
        return a, b
    if mean_b > mean_a:
        return b, a
    return (a, b) if a.ticker <= b.ticker else (b, a)


def coint_matrix(panel: AlignedPanel, max_lag: int | None = None) -> PValueMatrix:
    """Engle-Granger p-value for every unordered pair of panel tickers.

    Within each pair the higher-mean-close ticker is the regressor and the
    other the dependent series, matching the predictor/target convention of
    the pair model; the ordering used is recorded per cell.
    """
    n = len(panel.tickers)
    if n < 2:
        raise ValueError("panel must hold at least 2 tickers")
    if len(panel.dates) < 30:
        raise SeriesTooShort(f"need >= 30 common dates, have {len(panel.dates)}")

    columns = [panel.column(t) for t in panel.tickers]
    values = np.full((n, n), math.nan)
    orderings: list[tuple[str, str]] = []
    for i in range(n):
        for j in range(i + 1, n):
            predictor, target = order_pair(columns[i], columns[j])
            try:
                result = engle_granger(target, predictor, max_lag=max_lag)
            except PairTraderError as exc:
                raise type(exc)(
                    f"pair ({panel.tickers[i]}, {panel.tickers[j]}): {exc}"
                ) from exc
            values[i, j] = result.p_value
            orderings.append((predictor.ticker, target.ticker))
    return PValueMatrix(tickers=panel.tickers, values=values, orderings=tuple(orderings))


def select_pairs(
    m: PValueMatrix,
    threshold: float = DEFAULT_THRESHOLD,
    near_eps: float = DEFAULT_NEAR_EPS,
) -> list[SelectedPair]:
    """Pairs with p below the threshold, plus near-misses within ``near_eps``.

    Output is sorted by ascending p-value (ties by ticker pair); an empty
    list is a valid outcome.  A zero threshold disables selection entirely,
    near-misses included.
    """
    if not 0.0 <= threshold < 1.0:
        raise ValueError(f"threshold must lie in [0, 1), got {threshold}")
    if near_eps < 0.0:
        raise ValueError(f"near_eps must be >= 0, got {near_eps}")
    if threshold == 0.0:
        return []
    selected = []
    for _, _, p, predictor, target in m.cells():
        if p < threshold:
            selected.append(SelectedPair(predictor, target, p, near_threshold=False))
        elif p < threshold + near_eps:
            selected.append(SelectedPair(predictor, target, p, near_threshold=True))
    selected.sort(key=lambda sp: (sp.coint_p, sp.predictor_ticker, sp.target_ticker))
    return selected


def intersect_series(a: PriceSeries, b: PriceSeries) -> tuple[PriceSeries, PriceSeries]:
    """Inner-join two price series onto their common dates."""
    if a.dates == b.dates:
        return a, b
    common = sorted(set(a.dates) & set(b.dates))
    if not common:
        raise SeriesTooShort(f"{a.ticker} and {b.ticker} share no dates")
    a_map = dict(zip(a.dates, a.closes))
    b_map = dict(zip(b.dates, b.closes))
    dates = tuple(common)
    return (
        PriceSeries(a.ticker, dates, tuple(a_map[d] for d in dates)),
        PriceSeries(b.ticker, dates, tuple(b_map[d] for d in dates)),
    )


def _stationarity_verdict(result: AdfResult) -> str:
    if result.tau < result.crit["1%"]:
        return "stationary at 1%"
    if result.tau < result.crit["5%"]:
        return "stationary at 5%"
    if result.tau < result.crit["10%"]:
        return "stationary at 10%"
    return "not stationary"


def fit_pair(
    predictor: PriceSeries,
    target: PriceSeries,
    train: tuple[date, date],
    pair: SelectedPair | None = None,
) -> PairModel:
    """Fit the no-intercept pair model on the training window.

    Runs the through-origin regression of target on predictor, then the
    ADF test (with constant) on its residuals.  The model is produced even
    when the residuals fail the stationarity check; the verdict is recorded.
    When ``pair`` is omitted, the Engle-Granger p-value is computed here to
    fill in the selection record.
    """
    pred_w = slice_window(predictor, *train)
    targ_w = slice_window(target, *train)
    pred_w, targ_w = intersect_series(pred_w, targ_w)
    if len(pred_w) < 30:
        raise SeriesTooShort(
            f"{predictor.ticker}/{target.ticker}: only {len(pred_w)} common training dates"
        )

    report = ols_through_origin(pred_w, targ_w)

    if pair is None:
        try:
            eg = engle_granger(targ_w, pred_w)
            coint_p = eg.p_value
        except ConstantSeries:
            coint_p = 0.0  # exact linear dependence
        pair = SelectedPair(
            predictor_ticker=predictor.ticker,
            target_ticker=target.ticker,
            coint_p=coint_p,
            near_threshold=(
                DEFAULT_THRESHOLD <= coint_p < DEFAULT_THRESHOLD + DEFAULT_NEAR_EPS
            ),
        )

    residuals = np.asarray(report.residuals)
    try:
        residual_adf = adf_test(residuals, deterministic="constant")
        verdict = _stationarity_verdict(residual_adf)
    except ConstantSeries:
        residual_adf = None
        verdict = "degenerate (constant residuals)"

    return PairModel(
        pair=pair,
        report=report,
        residual_adf=residual_adf,
        train_window=train,
        residual_dates=pred_w.dates,
        verdict=verdict,
    )
