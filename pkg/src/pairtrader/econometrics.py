"""Pearson correlation and the no-intercept OLS hedge-ratio model.

The pair model regresses the target leg on the predictor leg through the
origin (no constant), so R-squared is the uncentered variant and the single
regressor makes ``F = t**2`` and the condition number exactly 1.  The report
carries every diagnostic a conventional regression summary prints: t/F tests,
log-likelihood, AIC/BIC, Durbin-Watson, Jarque-Bera, and the
D'Agostino-Pearson omnibus statistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import stats

from .errors import (
    AllZeroResiduals,
    DegenerateRegressor,
    LengthMismatch,
    SampleTooSmall,
    SeriesTooShort,
    ZeroVariance,
)
from .marketdata import AlignedPanel, PriceSeries, ReturnSeries, pct_change

#: Minimum sample size for the omnibus kurtosis transform to be stable.
OMNIBUS_MIN_N = 20


def _values(x) -> np.ndarray:
    """Coerce a PriceSeries / ReturnSeries / sequence into a float array."""
    if isinstance(x, PriceSeries):
        return x.closes_array()
    if isinstance(x, ReturnSeries):
        return x.returns_array()
    return np.asarray(x, dtype=float)


def _check_same_dates(a, b) -> None:
    if isinstance(a, (PriceSeries, ReturnSeries)) and isinstance(b, (PriceSeries, ReturnSeries)):
        if a.dates != b.dates:
            raise LengthMismatch(f"{a.ticker} and {b.ticker} are not on the same calendar")


def pearson_correlation(a, b) -> float:
    """Pearson product-moment correlation of two equal-length series."""
    _check_same_dates(a, b)
    x = _values(a)
    y = _values(b)
    if x.shape != y.shape:
        raise LengthMismatch(f"lengths {x.size} vs {y.size}")
    if x.size < 3:
        raise SeriesTooShort(f"need >= 3 observations, have {x.size}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("correlation undefined for a constant series")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric Pearson correlation matrix over a panel's return series."""

    tickers: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def correlation(self, a: str, b: str) -> float:
        return float(self.values[self.tickers.index(a), self.tickers.index(b)])


def correlation_matrix(panel: AlignedPanel) -> CorrelationMatrix:
    """Pairwise return correlations for every ticker pair in a panel.

    Returns are simple daily returns of each column; the diagonal is exactly
    1 and the matrix is exactly symmetric by construction.
    """
    n = len(panel.tickers)
    if n < 2:
        raise ValueError("panel must hold at least 2 tickers")
    if len(panel.dates) < 3:
        raise SeriesTooShort("panel must span at least 3 dates")

    returns = []
    for ticker in panel.tickers:
        returns.append(pct_change(panel.column(ticker)))

    values = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            try:
                r = pearson_correlation(returns[i], returns[j])
            except ZeroVariance:
                bad = panel.tickers[i] if np.ptp(returns[i].returns_array()) == 0 else panel.tickers[j]
                raise ZeroVariance(f"returns of {bad} have zero variance") from None
            values[i, j] = r
            values[j, i] = r
    return CorrelationMatrix(tickers=panel.tickers, values=values)


class JarqueBeraResult(NamedTuple):
    statistic: float
    p_value: float
    skew: float
    kurtosis: float


class OmnibusResult(NamedTuple):
    statistic: float
    p_value: float


def _moments(e: np.ndarray) -> tuple[float, float, float]:
    """Population variance, skewness, and raw kurtosis (normal = 3).

    Deviations are normalized by their largest magnitude before the higher
    moments: skewness and kurtosis are scale-free, and the rescaling stops
    ``m2**1.5`` underflowing to zero for tiny-valued samples.
    """
    centered = e - e.mean()
    scale = float(np.max(np.abs(centered)))
    if scale == 0.0:
        raise ZeroVariance("moments undefined for a zero-variance sample")
    unit = centered / scale
    m2 = float(np.mean(unit**2))
    if m2 == 0.0:
        raise ZeroVariance("moments undefined for a zero-variance sample")
    m3 = float(np.mean(unit**3))
    m4 = float(np.mean(unit**4))
    return m2 * scale**2, m3 / m2**1.5, m4 / m2**2


def durbin_watson(e) -> float:
    """Durbin-Watson statistic ``sum (e_t - e_{t-1})^2 / sum e_t^2``."""
    resid = _values(e)
    if resid.size < 2:
        raise SeriesTooShort(f"need >= 2 residuals, have {resid.size}")
    denom = float(resid @ resid)
    if denom == 0.0:
        raise AllZeroResiduals("Durbin-Watson undefined when all residuals are zero")
    diff = np.diff(resid)
    return float(diff @ diff) / denom


def jarque_bera_from_moments(n: int, skew: float, kurtosis: float) -> tuple[float, float]:
    """JB statistic ``n/6 * (S^2 + (K-3)^2 / 4)`` and its chi-square(2) p-value."""
    jb = n / 6.0 * (skew**2 + (kurtosis - 3.0) ** 2 / 4.0)
    return jb, float(stats.chi2.sf(jb, 2))


def jarque_bera(e) -> JarqueBeraResult:
    """Jarque-Bera normality test from population skewness and kurtosis."""
    resid = _values(e)
    n = resid.size
    if n < 4:
        raise SeriesTooShort(f"need >= 4 residuals, have {n}")
    _, skew, kurt = _moments(resid)
    jb, p = jarque_bera_from_moments(n, skew, kurt)
    return JarqueBeraResult(statistic=jb, p_value=p, skew=skew, kurtosis=kurt)


def _skew_z(skew: float, n: int) -> float:
    # D'Agostino (1970) normalizing transform of sample skewness.
    y = skew * math.sqrt((n + 1) * (n + 3) / (6.0 * (n - 2)))
    beta2 = 3.0 * (n**2 + 27 * n - 70) * (n + 1) * (n + 3) / (
        (n - 2.0) * (n + 5) * (n + 7) * (n + 9)
    )
    w2 = -1.0 + math.sqrt(2.0 * (beta2 - 1.0))
    delta = 1.0 / math.sqrt(0.5 * math.log(w2))
    alpha = math.sqrt(2.0 / (w2 - 1.0))
    if y == 0.0:
        y = 1.0
    return delta * math.log(y / alpha + math.sqrt((y / alpha) ** 2 + 1.0))


def _kurtosis_z(kurt: float, n: int) -> float:
    # Anscombe & Glynn (1983) normalizing transform of sample kurtosis.
    mean_b2 = 3.0 * (n - 1) / (n + 1)
    var_b2 = 24.0 * n * (n - 2) * (n - 3) / ((n + 1) ** 2 * (n + 3) * (n + 5))
    x = (kurt - mean_b2) / math.sqrt(var_b2)
    sqrt_beta1 = (
        6.0 * (n * n - 5 * n + 2) / ((n + 7) * (n + 9))
        * math.sqrt(6.0 * (n + 3) * (n + 5) / (n * (n - 2) * (n - 3)))
    )
    a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + math.sqrt(1.0 + 4.0 / sqrt_beta1**2))
    term1 = 1.0 - 2.0 / (9.0 * a)
    denom = 1.0 + x * math.sqrt(2.0 / (a - 4.0))
    if denom == 0.0:
        return math.nan
    term2 = math.copysign(abs((1.0 - 2.0 / a) / denom) ** (1.0 / 3.0), denom)
    return (term1 - term2) / math.sqrt(2.0 / (9.0 * a))


def omnibus_k2(e) -> OmnibusResult:
    """D'Agostino-Pearson K-squared normality test.

    Combines the skewness and kurtosis z-transforms into a chi-square(2)
    statistic.  The kurtosis transform is unstable for tiny samples, so at
    least 20 observations are required.
    """
    resid = _values(e)
    n = resid.size
    if n < OMNIBUS_MIN_N:
        raise SampleTooSmall(f"omnibus test needs >= {OMNIBUS_MIN_N} observations, have {n}")
    _, skew, kurt = _moments(resid)
    z1 = _skew_z(skew, n)
    z2 = _kurtosis_z(kurt, n)
    k2 = z1**2 + z2**2
    return OmnibusResult(statistic=k2, p_value=float(stats.chi2.sf(k2, 2)))


@dataclass(frozen=True)
class OlsOriginReport:
    """Fit report of the no-intercept regression ``y = beta * x + e``.

    Diagnostic fields that are undefined for a degenerate fit (all-zero
    residuals, or too few observations for the omnibus transform) are NaN.
    """

    hedge_ratio: float
    se_beta: float
    t_stat: float
    p_t: float
    f_stat: float
    p_f: float
    r2_uncentered: float
    adj_r2_uncentered: float
    log_likelihood: float
    aic: float
    bic: float
    durbin_watson: float
    jarque_bera: float
    p_jb: float
    skew: float
    kurtosis: float
    omnibus_k2: float
    p_omnibus: float
    cond_no: float
    n_obs: int
    residuals: tuple[float, ...]

    def to_json_dict(self) -> dict:
        out = {
            "hedge_ratio": self.hedge_ratio,
            "se_beta": self.se_beta,
            "t_stat": self.t_stat,
            "p_t": self.p_t,
            "f_stat": self.f_stat,
            "p_f": self.p_f,
            "r2_uncentered": self.r2_uncentered,
            "adj_r2_uncentered": self.adj_r2_uncentered,
            "log_likelihood": self.log_likelihood,
            "aic": self.aic,
            "bic": self.bic,
            "durbin_watson": self.durbin_watson,
            "jarque_bera": self.jarque_bera,
            "p_jb": self.p_jb,
            "skew": self.skew,
            "kurtosis": self.kurtosis,
            "omnibus_k2": self.omnibus_k2,
            "p_omnibus": self.p_omnibus,
            "cond_no": self.cond_no,
            "n_obs": self.n_obs,
        }
        # JSON has no NaN/inf literal; encode as None.
        return {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
                for k, v in out.items()}

    def to_text(self, dep_name: str = "asset2", regressor_name: str = "asset1") -> str:
        """Plain-text summary block in conventional regression-table layout."""
        def fmt(v: float, spec: str = "%.3f") -> str:
            if not math.isfinite(v):
                return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
            return spec % v

        df_resid = self.n_obs - 1
        if math.isfinite(self.t_stat):
            half = stats.t.ppf(0.975, df_resid) * self.se_beta
            ci_low, ci_high = self.hedge_ratio - half, self.hedge_ratio + half
        else:
            ci_low = ci_high = self.hedge_ratio
        left = [
            ("Dep. Variable:", dep_name),
            ("Model:", "OLS"),
            ("Method:", "Least Squares"),
            ("No. Observations:", str(self.n_obs)),
            ("Df Residuals:", str(df_resid)),
            ("Df Model:", "1"),
            ("Covariance Type:", "nonrobust"),
        ]
        right = [
            ("R-squared (uncentered):", fmt(self.r2_uncentered)),
            ("Adj. R-squared (uncentered):", fmt(self.adj_r2_uncentered)),
            ("F-statistic:", fmt(self.f_stat, "%.4g")),
            ("Prob (F-statistic):", fmt(self.p_f, "%.3g")),
            ("Log-Likelihood:", fmt(self.log_likelihood, "%.1f")),
            ("AIC:", fmt(self.aic, "%.4g")),
            ("BIC:", fmt(self.bic, "%.4g")),
        ]
        width = 78
        lines = ["OLS Regression Results (no intercept)".center(width), "=" * width]
        for i in range(max(len(left), len(right))):
            lname, lval = left[i] if i < len(left) else ("", "")
            rname, rval = right[i] if i < len(right) else ("", "")
            lfield = f"{lname} {lval:>{37 - len(lname) - 1}}" if lname else " " * 37
            rfield = f"{rname} {rval:>{39 - len(rname) - 1}}" if rname else ""
            lines.append(f"{lfield}  {rfield}".rstrip())
        lines.append("=" * width)
        lines.append(
            f"{'':>12} {'coef':>10} {'std err':>10} {'t':>10} {'P>|t|':>10}"
            f" {'[0.025':>10} {'0.975]':>10}"
        )
        lines.append("-" * width)
        lines.append(
            f"{regressor_name:>12} {fmt(self.hedge_ratio, '%.4f'):>10}"
            f" {fmt(self.se_beta, '%.4f'):>10} {fmt(self.t_stat, '%.3f'):>10}"
            f" {fmt(self.p_t, '%.3f'):>10} {fmt(ci_low, '%.4f'):>10} {fmt(ci_high, '%.4f'):>10}"
        )
        lines.append("=" * width)
        tail_left = [
            ("Omnibus:", fmt(self.omnibus_k2)),
            ("Prob(Omnibus):", fmt(self.p_omnibus)),
            ("Skew:", fmt(self.skew)),
            ("Kurtosis:", fmt(self.kurtosis)),
        ]
        tail_right = [
            ("Durbin-Watson:", fmt(self.durbin_watson)),
            ("Jarque-Bera (JB):", fmt(self.jarque_bera)),
            ("Prob(JB):", fmt(self.p_jb, "%.3g")),
            ("Cond. No.", fmt(self.cond_no, "%.2f")),
        ]
        for (lname, lval), (rname, rval) in zip(tail_left, tail_right):
            lines.append(
                f"{lname} {lval:>{36 - len(lname)}}  {rname} {rval:>{38 - len(rname)}}"
            )
        lines.append("=" * width)
        lines.append("Notes:")
        lines.append("[1] R-squared is uncentered because the model has no constant.")
        return "\n".join(lines) + "\n"


def ols_through_origin(x, y) -> OlsOriginReport:
    """Fit ``y = beta * x`` by least squares with the full diagnostic suite.

    ``beta = sum(x*y) / sum(x**2)`` with one estimated coefficient, so the
    residual degrees of freedom are ``n - 1``.  The log-likelihood is the
    Gaussian MLE value (variance ``sum(e**2)/n``); AIC/BIC use ``k = 1``.
    """
    _check_same_dates(x, y)
    xv = _values(x)
    yv = _values(y)
    if xv.shape != yv.shape:
        raise LengthMismatch(f"lengths {xv.size} vs {yv.size}")
    n = int(xv.size)
    if n < 2:
        raise SeriesTooShort(f"need >= 2 observations, have {n}")
    sxx = float(xv @ xv)
    if sxx == 0.0:
        raise DegenerateRegressor("regressor is identically zero")

    beta = float(xv @ yv) / sxx
    resid = yv - beta * xv
    ssr = float(resid @ resid)
    syy = float(yv @ yv)
    df_resid = n - 1

    if ssr > 0.0:
        se = math.sqrt((ssr / df_resid) / sxx)
        t_stat = beta / se
        p_t = 2.0 * float(stats.t.sf(abs(t_stat), df_resid))
        f_stat = t_stat**2
        p_f = float(stats.f.sf(f_stat, 1, df_resid))
        sigma2 = ssr / n
        loglik = -0.5 * n * (math.log(2.0 * math.pi) + math.log(sigma2) + 1.0)
        dw = durbin_watson(resid)
        try:
            jb = jarque_bera(resid)
            jb_stat, p_jb, skew, kurt = jb
        except (ZeroVariance, SeriesTooShort):
            jb_stat = p_jb = skew = kurt = math.nan
        if n >= OMNIBUS_MIN_N:
            try:
                omni = omnibus_k2(resid)
                omni_stat, p_omni = omni.statistic, omni.p_value
            except ZeroVariance:
                omni_stat = p_omni = math.nan
        else:
            omni_stat = p_omni = math.nan
    else:
        # Exact fit: t and F diverge, residual diagnostics are undefined.
        se = 0.0
        t_stat = math.copysign(math.inf, beta) if beta != 0.0 else math.nan
        p_t = 0.0 if beta != 0.0 else math.nan
        f_stat = math.inf if beta != 0.0 else math.nan
        p_f = p_t
        loglik = math.inf
        dw = jb_stat = p_jb = skew = kurt = omni_stat = p_omni = math.nan

    r2 = 1.0 - ssr / syy if syy > 0.0 else math.nan
    adj_r2 = 1.0 - (1.0 - r2) * n / df_resid if syy > 0.0 else math.nan

    return OlsOriginReport(
        hedge_ratio=beta,
        se_beta=se,
        t_stat=t_stat,
        p_t=p_t,
        f_stat=f_stat,
        p_f=p_f,
        r2_uncentered=r2,
        adj_r2_uncentered=adj_r2,
        log_likelihood=loglik,
        aic=2.0 - 2.0 * loglik,
        bic=math.log(n) - 2.0 * loglik,
        durbin_watson=dw,
        jarque_bera=jb_stat,
        p_jb=p_jb,
        skew=skew,
        kurtosis=kurt,
        omnibus_k2=omni_stat,
        p_omnibus=p_omni,
        cond_no=1.0,
        n_obs=n,
        residuals=tuple(float(e) for e in resid),
    )
