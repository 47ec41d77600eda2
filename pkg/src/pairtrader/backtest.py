"""Two-leg backtest accounting: cash, holdings, daily totals, and returns.

Each leg starts with a fixed capital amount; share counts are sized once
from the first close of the window (floor of capital / price) and reused for
every later trade of that leg.  Trades execute at the trigger day's close
with no transaction costs, shorts credit cash immediately, and nothing is
force-liquidated at the end: the final total is mark-to-market.

Currency amounts are carried as exact decimals so the accounting identity
``total = cash1 + cash2 + holdings1 + holdings2`` holds to the last digit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date
from decimal import ROUND_FLOOR, ROUND_HALF_UP, Decimal

from .errors import EmptyFrame, EmptyList, PriceExceedsCapital
from .signalgen import TradingFrame, Trigger, extract_triggers

DEFAULT_CAPITAL = Decimal("100000")

_CENT = Decimal("0.01")


def _money(value) -> Decimal:
    """Exact decimal for a price or capital amount given as float/int/str."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, float):
        # repr() is the shortest round-tripping form, so a price parsed from
        # "123.45" comes back as Decimal("123.45") exactly.
        return Decimal(repr(value))
    return Decimal(value)


@dataclass(frozen=True)
class BacktestConfig:
    """Capital per leg and the evaluation window."""

    capital_per_leg: Decimal = DEFAULT_CAPITAL
    test_window: tuple[date, date] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "capital_per_leg", _money(self.capital_per_leg))
        if self.capital_per_leg <= 0:
            raise ValueError("capital_per_leg must be positive")


@dataclass(frozen=True)
class LedgerRow:
    date: date
    cash1: Decimal
    cash2: Decimal
    holdings1: Decimal
    holdings2: Decimal
    total: Decimal


@dataclass(frozen=True)
class BacktestLedger:
    """Daily cash and holdings per leg, plus the executed triggers."""

    ticker1: str
    ticker2: str
    shares1: int
    shares2: int
    rows: tuple[LedgerRow, ...]
    triggers: tuple[Trigger, ...]

    @property
    def final_total(self) -> Decimal:
        return self.rows[-1].total

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["date", "cash1", "cash2", "holdings1", "holdings2", "total"])
            for row in self.rows:
                writer.writerow([
                    row.date.isoformat(),
                    str(row.cash1), str(row.cash2),
                    str(row.holdings1), str(row.holdings2),
                    str(row.total),
                ])


def ledger_rows_from_csv(path) -> tuple[LedgerRow, ...]:
    """Re-parse a ledger CSV into exact-decimal rows."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        return tuple(
            LedgerRow(
                date=date.fromisoformat(r["date"]),
                cash1=Decimal(r["cash1"]),
                cash2=Decimal(r["cash2"]),
                holdings1=Decimal(r["holdings1"]),
                holdings2=Decimal(r["holdings2"]),
                total=Decimal(r["total"]),
            )
            for r in reader
        )


def size_shares(capital_per_leg, first_close) -> int:
    """Whole shares affordable at the first close: ``floor(capital / price)``."""
    price = _money(first_close)
    if price <= 0:
        raise ValueError("first close must be positive")
    shares = int((_money(capital_per_leg) / price).to_integral_value(rounding=ROUND_FLOOR))
    if shares == 0:
        raise PriceExceedsCapital(
            f"first close {price} exceeds per-leg capital {capital_per_leg}"
        )
    return shares


def run_ledger(frame: TradingFrame, config: BacktestConfig) -> BacktestLedger:
    """Replay a trading frame into a daily mark-to-market ledger.

    Every nonzero position delta trades ``delta * shares`` at that day's
    close; holdings are marked to market daily from the signal state.
    """
    if len(frame) == 0:
        raise EmptyFrame("trading frame has no rows")
    frame.validate()

    capital = config.capital_per_leg
    shares1 = size_shares(capital, frame.close1[0])
    shares2 = size_shares(capital, frame.close2[0])

    cash1 = capital
    cash2 = capital
    rows: list[LedgerRow] = []
    for t in range(len(frame)):
        price1 = _money(frame.close1[t])
        price2 = _money(frame.close2[t])
        if frame.positions1[t]:
            cash1 -= frame.positions1[t] * shares1 * price1
        if frame.positions2[t]:
            cash2 -= frame.positions2[t] * shares2 * price2
        holdings1 = frame.signals1[t] * shares1 * price1
        holdings2 = frame.signals2[t] * shares2 * price2
        rows.append(
            LedgerRow(
                date=frame.dates[t],
                cash1=cash1,
                cash2=cash2,
                holdings1=holdings1,
                holdings2=holdings2,
                total=cash1 + cash2 + holdings1 + holdings2,
            )
        )

    return BacktestLedger(
        ticker1=frame.ticker1,
        ticker2=frame.ticker2,
        shares1=shares1,
        shares2=shares2,
        rows=tuple(rows),
        triggers=tuple(extract_triggers(frame)),
    )


def annual_return_pct(profit, initial_investment) -> Decimal:
    """``profit / initial * 100`` rounded half-away-from-zero to 2 decimals."""
    ratio = _money(profit) / _money(initial_investment) * 100
    return ratio.quantize(_CENT, rounding=ROUND_HALF_UP)


@dataclass(frozen=True)
class PairSummary:
    """Headline result of one pair's backtest."""

    ticker1: str
    ticker2: str
    initial_investment: Decimal
    profit: Decimal
    annual_return: Decimal

    @property
    def pair_label(self) -> str:
        return f"{self.ticker1} - {self.ticker2}"

    def to_json_dict(self) -> dict:
        return {
            "ticker1": self.ticker1,
            "ticker2": self.ticker2,
            "initial_investment": str(self.initial_investment),
            "profit": str(self.profit),
            "annual_return": str(self.annual_return),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PairSummary":
        return cls(
            ticker1=data["ticker1"],
            ticker2=data["ticker2"],
            initial_investment=Decimal(data["initial_investment"]),
            profit=Decimal(data["profit"]),
            annual_return=Decimal(data["annual_return"]),
        )


def summarize_pair(ledger: BacktestLedger, config: BacktestConfig) -> PairSummary:
    """Profit over the window and the percent return on total capital."""
    if not ledger.rows:
        raise EmptyFrame("ledger has no rows")
    initial = 2 * config.capital_per_leg
    profit = ledger.final_total - initial
    return PairSummary(
        ticker1=ledger.ticker1,
        ticker2=ledger.ticker2,
        initial_investment=initial,
        profit=profit,
        annual_return=annual_return_pct(profit, initial),
    )


@dataclass(frozen=True)
class SectorReport:
    """Per-sector roll-up: pair rows sorted by return, best first."""

    sector: str
    rows: tuple[PairSummary, ...]
    n_pairs: int
    n_positive: int
    max_return: Decimal

    def to_json_dict(self) -> dict:
        return {
            "sector": self.sector,
            "rows": [row.to_json_dict() for row in self.rows],
            "n_pairs": self.n_pairs,
            "n_positive": self.n_positive,
            "max_return": str(self.max_return),
        }

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["Stock Pair", "Init Investment", "Profit", "Annual Return"])
            for row in self.rows:
                writer.writerow([
                    row.pair_label,
                    str(row.initial_investment),
                    str(row.profit),
                    str(row.annual_return),
                ])


def sector_report(summaries: list[PairSummary], sector: str) -> SectorReport:
    """Aggregate pair summaries for one sector."""
    if not summaries:
        raise EmptyList(f"sector {sector!r} has no pair summaries")
    rows = tuple(
        sorted(summaries, key=lambda s: (-s.annual_return, s.ticker1, s.ticker2))
    )
    return SectorReport(
        sector=sector,
        rows=rows,
        n_pairs=len(rows),
        n_positive=sum(1 for s in rows if s.profit > 0),
        max_return=rows[0].annual_return,
    )
