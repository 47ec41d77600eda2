"""Augmented Dickey-Fuller and Engle-Granger tests with MacKinnon surfaces.

The ADF regression is

    dy_t = [alpha] + gamma * y_{t-1} + sum_{i=1..k} delta_i * dy_{t-i} + eps_t

with the lag order k chosen by AIC over a common truncated sample (all
candidate regressions see the observations available at ``max_lag``, so their
AICs are comparable), followed by a refit at the chosen k on the longest
sample that lag permits.  The unit-root null is rejected when the t-ratio on
the lagged level is below (more negative than) the critical value.

Critical values and approximate p-values come from MacKinnon's published
response surfaces, bundled as a plain-text constants file under ``data/``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from types import MappingProxyType

import numpy as np

from .errors import (
    ConstantSeries,
    DegenerateRegressor,
    LengthMismatch,
    SeriesTooShort,
    UnknownSurface,
)
from .marketdata import PriceSeries

LEVELS = ("1%", "5%", "10%")

_DETERMINISTICS = ("none", "constant")


@dataclass(frozen=True)
class MacKinnonTables:
    """Immutable response-surface coefficient tables.

    ``crit`` maps (n_series, deterministic, level) to the four critical-value
    coefficients; ``pval_small``/``pval_large`` map (n_series, deterministic)
    to the two p-value polynomials, and ``bounds`` to their
    (tau_min, tau_star, tau_max) switchover points.
    """

    crit: MappingProxyType
    pval_small: MappingProxyType
    pval_large: MappingProxyType
    bounds: MappingProxyType

    @classmethod
    def from_text(cls, text: str) -> "MacKinnonTables":
        crit: dict = {}
        small: dict = {}
        large: dict = {}
        bounds: dict = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            kind = fields[0]
            if kind == "crit":
                n, det, level = int(fields[1]), fields[2], fields[3]
                crit[(n, det, level)] = tuple(float(v) for v in fields[4:8])
            elif kind == "pval":
                n, det, regime = int(fields[1]), fields[2], fields[3]
                coeffs = tuple(float(v) for v in fields[4:])
                (small if regime == "small" else large)[(n, det)] = coeffs
            elif kind == "bounds":
                n, det = int(fields[1]), fields[2]
                bounds[(n, det)] = tuple(float(v) for v in fields[3:6])
            else:
                raise ValueError(f"unknown table row kind {kind!r}")
        return cls(
            crit=MappingProxyType(crit),
            pval_small=MappingProxyType(small),
            pval_large=MappingProxyType(large),
            bounds=MappingProxyType(bounds),
        )


@lru_cache(maxsize=1)
def load_tables() -> MacKinnonTables:
    """Parse the bundled constants file (cached; the tables are read-only)."""
    text = (
        resources.files("pairtrader")
        .joinpath("data", "mackinnon_tables.txt")
        .read_text(encoding="utf-8")
    )
    return MacKinnonTables.from_text(text)


def _check_deterministic(deterministic: str) -> None:
    if deterministic not in _DETERMINISTICS:
        raise ValueError(f"deterministic must be one of {_DETERMINISTICS}")


def mackinnon_crit(n_series: int, deterministic: str, level: str, nobs: float) -> float:
    """Critical value ``b_inf + b1/T + b2/T^2 + b3/T^3`` at sample size T.

    ``nobs`` may be ``math.inf`` to get the asymptotic value.
    """
    _check_deterministic(deterministic)
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}")
    if nobs is not math.inf and nobs < 20:
        raise ValueError(f"effective sample size {nobs} below 20")
    try:
        b = load_tables().crit[(n_series, deterministic, level)]
    except KeyError:
        raise UnknownSurface(
            f"no critical-value surface for (n_series={n_series}, {deterministic!r})"
        ) from None
    if nobs is math.inf or math.isinf(nobs):
        return b[0]
    t = float(nobs)
    return b[0] + b[1] / t + b[2] / t**2 + b[3] / t**3


def _norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def mackinnon_pvalue(tau: float, n_series: int, deterministic: str) -> float:
    """Approximate asymptotic p-value ``Phi(poly(tau))``, clamped to [0, 1].

    Returns 0 below the tabulated minimum and 1 above the maximum; the
    "small" polynomial applies for ``tau <= tau_star`` and the "large" one
    above it.
    """
    _check_deterministic(deterministic)
    tables = load_tables()
    key = (n_series, deterministic)
    try:
        tau_min, tau_star, tau_max = tables.bounds[key]
    except KeyError:
        raise UnknownSurface(
            f"no p-value surface for (n_series={n_series}, {deterministic!r})"
        ) from None
    if tau > tau_max:
        return 1.0
    if tau < tau_min:
        return 0.0
    coeffs = tables.pval_small[key] if tau <= tau_star else tables.pval_large[key]
    poly = 0.0
    for c in reversed(coeffs):
        poly = poly * tau + c
    return min(1.0, max(0.0, _norm_cdf(poly)))


@dataclass(frozen=True)
class AdfResult:
    """Outcome of an augmented Dickey-Fuller test."""

    tau: float
    used_lags: int
    n_eff: int
    crit: MappingProxyType
    p_value: float
    deterministic: str

    def to_json_dict(self) -> dict:
        return {
            "tau": self.tau,
            "used_lags": self.used_lags,
            "n_eff": self.n_eff,
            "crit": dict(self.crit),
            "p_value": self.p_value,
            "deterministic": self.deterministic,
        }


@dataclass(frozen=True)
class CointResult:
    """Outcome of a two-step Engle-Granger cointegration test."""

    tau: float
    p_value: float
    crit: MappingProxyType
    dependent_ticker: str
    regressor_ticker: str
    used_lags: int
    n_eff: int

    def to_json_dict(self) -> dict:
        return {
            "tau": self.tau,
            "p_value": self.p_value,
            "crit": dict(self.crit),
            "dependent_ticker": self.dependent_ticker,
            "regressor_ticker": self.regressor_ticker,
            "used_lags": self.used_lags,
            "n_eff": self.n_eff,
        }


def default_max_lag(n: int) -> int:
    """Schwert-style rule of thumb ``floor(12 * (n/100)**0.25)``.

    Capped so the widest candidate regression keeps at least one residual
    degree of freedom (binds only for very short series).
    """
    rule = int(math.floor(12.0 * (n / 100.0) ** 0.25))
    return max(0, min(rule, (n - 4) // 2))


def _as_1d(series) -> np.ndarray:
    if isinstance(series, PriceSeries):
        return series.closes_array()
    values = np.asarray(series, dtype=float)
    if values.ndim != 1:
        raise ValueError("series must be one-dimensional")
    return values


def _adf_design(y: np.ndarray, lag: int, constant: bool) -> tuple[np.ndarray, np.ndarray]:
    """Rows t = lag+2 .. n of [const?, y_{t-1}, dy_{t-1}, ..., dy_{t-lag}]."""
    dy = np.diff(y)
    nobs = dy.size - lag
    rhs_cols: list[np.ndarray] = []
    if constant:
        rhs_cols.append(np.ones(nobs))
    rhs_cols.append(y[lag:-1])
    for i in range(1, lag + 1):
        rhs_cols.append(dy[lag - i : dy.size - i])
    return np.column_stack(rhs_cols), dy[lag:]


def adf_test(series, deterministic: str = "constant", max_lag: int | None = None) -> AdfResult:
    """Augmented Dickey-Fuller unit-root test with AIC lag selection.

    AIC is evaluated for every k in 0..max_lag on the sample truncated at
    max_lag; the winning k is then refit on its own longest sample, giving
    ``n_eff = n - used_lags - 1`` regression observations.  Critical values
    use the single-series MacKinnon surface at ``n_eff``.
    """
    _check_deterministic(deterministic)
    y = _as_1d(series)
    n = y.size
    if n >= 1 and np.ptp(y) == 0.0:
        raise ConstantSeries("series is constant")
    if max_lag is None:
        max_lag = default_max_lag(n)
        if n < 10 + max_lag:
            raise SeriesTooShort(f"need >= {10 + max_lag} observations, have {n}")
    else:
        if max_lag < 0:
            raise ValueError("max_lag must be >= 0")
        ntrend = 1 if deterministic == "constant" else 0
        if n - 1 - max_lag < ntrend + 2 + max_lag:
            raise SeriesTooShort(
                f"{n} observations leave no degrees of freedom at max_lag={max_lag}"
            )

    constant = deterministic == "constant"
    ntrend = 1 if constant else 0

    # One QR of the widest design scores every nested candidate: the model
    # with k lags uses the first ntrend+1+k columns, so its SSR falls out of
    # the prefix sums of (Q'b)^2.
    X_full, b = _adf_design(y, max_lag, constant)
    nobs_common = b.size
    q, r = np.linalg.qr(X_full)
    if min(abs(np.diag(r))) <= 1e-12 * max(abs(np.diag(r))):
        raise ConstantSeries("unit-root regression is singular")
    qtb = q.T @ b
    total = float(b @ b)
    explained = np.cumsum(qtb**2)

    best_k = 0
    best_aic = math.inf
    for k in range(0, max_lag + 1):
        p = ntrend + 1 + k
        ssr = max(total - float(explained[p - 1]), 0.0)
        if ssr <= 0.0:
            raise ConstantSeries("unit-root regression fits exactly")
        ll = -0.5 * nobs_common * (math.log(2.0 * math.pi) + math.log(ssr / nobs_common) + 1.0)
        aic = 2.0 * p - 2.0 * ll
        if aic < best_aic:
            best_aic = aic
            best_k = k

    # Refit the winner on the longest sample its lag order allows.
    X, b = _adf_design(y, best_k, constant)
    n_eff = b.size
    nparams = X.shape[1]
    coef, _, rank, _ = np.linalg.lstsq(X, b, rcond=None)
    if rank < nparams:
        raise ConstantSeries("unit-root regression is singular")
    resid = b - X @ coef
    ssr = float(resid @ resid)
    dof = n_eff - nparams
    if dof <= 0 or ssr <= 0.0:
        raise ConstantSeries("unit-root regression has no residual variance")
    sigma2 = ssr / dof
    xtx_inv = np.linalg.inv(X.T @ X)
    gamma_idx = ntrend
    se_gamma = math.sqrt(sigma2 * xtx_inv[gamma_idx, gamma_idx])
    tau = float(coef[gamma_idx] / se_gamma)

    crit = {lvl: mackinnon_crit(1, deterministic, lvl, n_eff) for lvl in LEVELS}
    return AdfResult(
        tau=tau,
        used_lags=best_k,
        n_eff=n_eff,
        crit=MappingProxyType(crit),
        p_value=mackinnon_pvalue(tau, 1, deterministic),
        deterministic=deterministic,
    )


def engle_granger(y, x, max_lag: int | None = None) -> CointResult:
    """Two-step Engle-Granger cointegration test of y on x.

    Stage 1 regresses ``y = c + b*x + u`` (with constant); stage 2 runs the
    ADF test on the residuals with no deterministic term, since the constant
    already lives in stage 1.  The p-value and critical values come from the
    two-series MacKinnon surface with a constant.
    """
    yv = _as_1d(y)
    xv = _as_1d(x)
    if yv.size != xv.size:
        raise LengthMismatch(f"lengths {yv.size} vs {xv.size}")
    if isinstance(y, PriceSeries) and isinstance(x, PriceSeries) and y.dates != x.dates:
        raise LengthMismatch(f"{y.ticker} and {x.ticker} are not on the same calendar")
    if yv.size < 30:
        raise SeriesTooShort(f"need >= 30 observations, have {yv.size}")

    dx = xv - xv.mean()
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise DegenerateRegressor("regressor is constant")
    slope = float(dx @ (yv - yv.mean())) / sxx
    intercept = yv.mean() - slope * xv.mean()
    resid = yv - intercept - slope * xv

    stage2 = adf_test(resid, deterministic="none", max_lag=max_lag)
    crit = {lvl: mackinnon_crit(2, "constant", lvl, stage2.n_eff) for lvl in LEVELS}
    return CointResult(
        tau=stage2.tau,
        p_value=mackinnon_pvalue(stage2.tau, 2, "constant"),
        crit=MappingProxyType(crit),
        dependent_ticker=y.ticker if isinstance(y, PriceSeries) else "y",
        regressor_ticker=x.ticker if isinstance(x, PriceSeries) else "x",
        used_lags=stage2.used_lags,
        n_eff=stage2.n_eff,
    )
