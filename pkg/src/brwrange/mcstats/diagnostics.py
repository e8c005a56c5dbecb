"""Goodness-of-fit and dependence diagnostics."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from .moments import InsufficientDataError, MomentAccumulator

MIN_CLT_SAMPLES = 100
MIN_EXPECTED = 5.0


@dataclass(frozen=True)
class CltDiagnostics:
    n_samples: int
    skewness: float
    excess_kurtosis: float
    skewness_z: float
    kurtosis_z: float
    ks_distance: float
    ks_pvalue: float
    ad_statistic: float
    gaussian: bool

    def as_dict(self) -> dict:
        return asdict(self)


def _skew_se(n: int) -> float:
    return math.sqrt(6.0 * n * (n - 1) / ((n - 2) * (n + 1) * (n + 3)))


def _kurt_se(n: int) -> float:
    return 2.0 * _skew_se(n) * math.sqrt((n * n - 1.0) / ((n - 3) * (n + 5)))


def studentize(x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    sd = x.std(ddof=1) if x.size > 1 else 0.0
    if not sd > 0:
        raise InsufficientDataError("samples have no variance")
    return (x - x.mean()) / sd


def clt_battery(samples, alpha: float = 1e-3) -> CltDiagnostics:
    """Compare a sample, studentized by its own mean and SD, with N(0, 1).

    ``gaussian`` is True when neither moment z-score nor the KS test rejects
    at level ``alpha``.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < MIN_CLT_SAMPLES:
        raise InsufficientDataError(f"{x.size} samples, at least {MIN_CLT_SAMPLES} needed")
    z = studentize(x)
    acc = MomentAccumulator.from_array(z)
    n = x.size
    skew, kurt = acc.skewness, acc.excess_kurtosis
    ks = stats.kstest(z, "norm")
    ad = stats.anderson(z, dist="norm").statistic
    crit = stats.norm.isf(alpha / 2)
    sz, kz = skew / _skew_se(n), kurt / _kurt_se(n)
    gaussian = abs(sz) < crit and abs(kz) < crit and ks.pvalue > alpha
    return CltDiagnostics(n, skew, kurt, sz, kz, float(ks.statistic), float(ks.pvalue),
                          float(ad), bool(gaussian))


@dataclass(frozen=True)
class ChiSquare:
    statistic: float
    dof: int
    pvalue: float
    observed: np.ndarray
    expected: np.ndarray


def independence_test(x, y, min_events: int = 500) -> ChiSquare:
    """2x2 Pearson chi-square of two binary samples observed together."""
    x = np.asarray(x).astype(bool).ravel()
    y = np.asarray(y).astype(bool).ravel()
    if x.shape != y.shape:
        raise ValueError("samples must be paired")
    if x.size < min_events:
        raise InsufficientDataError(f"conditioning event seen {x.size} times, need {min_events}")
    table = np.array([[np.sum(~x & ~y), np.sum(~x & y)],
                      [np.sum(x & ~y), np.sum(x & y)]], dtype=float)
    expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / table.sum()
    if expected.min() < MIN_EXPECTED:
        raise InsufficientDataError("a cell of the contingency table is too sparse")
    stat, p, dof, _ = stats.chi2_contingency(table, correction=False)
    return ChiSquare(float(stat), int(dof), float(p), table, expected)


def conditional_pairs(xi0, xi_far, dist, m: int):
    """Keep replicas where the two indices sit at tree distance ``m``."""
    mask = np.asarray(dist) == m
    return np.asarray(xi0)[mask], np.asarray(xi_far)[mask]


def geometric_pmf(x, q: float) -> np.ndarray:
    """``P(X = x) = (1 - q) q^x`` on ``x >= 0``."""
    x = np.asarray(x)
    return (1.0 - q) * q ** x


def geometric_chisquare(samples, q: float) -> ChiSquare:
    """Pearson chi-square of non-negative integers against geometric(q).

    Cells run over ``0, 1, ...`` and the last cell takes the whole tail;
    cells are closed once their expected count would drop below 5.
    """
    x = np.asarray(samples, dtype=np.int64).ravel()
    if x.size == 0 or x.min() < 0:
        raise ValueError("samples must be non-negative integers")
    n = x.size
    top = 0
    while n * q ** (top + 1) >= MIN_EXPECTED:
        top += 1
    counts = np.bincount(np.minimum(x, top), minlength=top + 1).astype(float)
    probs = geometric_pmf(np.arange(top + 1), q)
    probs[-1] = q ** top
    expected = n * probs
    if top == 0:
        raise InsufficientDataError("too few samples for a single degree of freedom")
    stat = float(np.sum((counts - expected) ** 2 / expected))
    dof = top
    return ChiSquare(stat, dof, float(stats.chi2.sf(stat, dof)), counts, expected)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    se_slope: float
    residuals: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def as_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "se_slope": self.se_slope,
                "residuals": self.residuals.tolist(), "x": self.x.tolist(), "y": self.y.tolist()}


def loglog_slope(x, y) -> SlopeFit:
    """Ordinary least squares of ``log y`` on ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.any(x <= 0) or np.any(y <= 0):
        raise InsufficientDataError("a log-log fit needs at least two positive points")
    lx, ly = np.log(x), np.log(y)
    res = stats.linregress(lx, ly)
    resid = ly - (res.intercept + res.slope * lx)
    se = float(res.stderr) if x.size > 2 else math.nan
    return SlopeFit(float(res.slope), float(res.intercept), se, resid, x, y)
