"""Streaming central moments and leave-one-out jackknife summaries."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np


class InsufficientDataError(ValueError):
    """Too few samples, or no variance, for the requested statistic."""


class MomentAccumulator:
    """Count, mean and central sums ``M2..M4`` with an associative merge.

    Batches are folded in with the pairwise update formulas of Pébay
    (2008), so any grouping of the same samples gives the same moments up
    to rounding.
    """

    __slots__ = ("n", "mean", "m2", "m3", "m4", "lo", "hi")

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = self.m3 = self.m4 = 0.0
        self.lo, self.hi = math.inf, -math.inf

    @classmethod
    def from_array(cls, x) -> "MomentAccumulator":
        x = np.asarray(x, dtype=float).ravel()
        acc = cls()
        if x.size:
            acc.n = x.size
            acc.mean = float(x.mean())
            c = x - acc.mean
            c2 = c * c
            acc.m2 = float(c2.sum())
            acc.m3 = float((c2 * c).sum())
            acc.m4 = float((c2 * c2).sum())
            acc.lo, acc.hi = float(x.min()), float(x.max())
        return acc

    def push(self, x) -> "MomentAccumulator":
        return self.merge(MomentAccumulator.from_array(x))

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if other.n == 0:
            return self
        if self.n == 0:
            for name in self.__slots__:
                setattr(self, name, getattr(other, name))
            return self
        na, nb = self.n, other.n
        n = na + nb
        delta = other.mean - self.mean
        d_n = delta / n
        m2 = self.m2 + other.m2 + delta * d_n * na * nb
        m3 = (self.m3 + other.m3 + d_n ** 2 * delta * na * nb * (na - nb)
              + 3.0 * d_n * (na * other.m2 - nb * self.m2))
        m4 = (self.m4 + other.m4
              + d_n ** 3 * delta * na * nb * (na * na - na * nb + nb * nb)
              + 6.0 * d_n ** 2 * (na * na * other.m2 + nb * nb * self.m2)
              + 4.0 * d_n * (na * other.m3 - nb * self.m3))
        self.n, self.mean = n, self.mean + d_n * nb
        self.m2, self.m3, self.m4 = m2, m3, m4
        self.lo, self.hi = min(self.lo, other.lo), max(self.hi, other.hi)
        return self

    @property
    def variance(self) -> float:
        return self.m2 / (self.n - 1) if self.n > 1 else math.nan

    @property
    def skewness(self) -> float:
        if self.n < 2 or self.m2 == 0:
            return math.nan
        return math.sqrt(self.n) * self.m3 / self.m2 ** 1.5

    @property
    def excess_kurtosis(self) -> float:
        if self.n < 2 or self.m2 == 0:
            return math.nan
        return self.n * self.m4 / self.m2 ** 2 - 3.0

    def central_moment(self, order: int) -> float:
        """Plug-in central moment ``sum (x - mean)^order / n`` for order 2..4."""
        return {2: self.m2, 3: self.m3, 4: self.m4}[order] / self.n


def _loo_power_sums(x: np.ndarray):
    """Central power sums of every leave-one-out subsample, about its own mean."""
    n = x.size
    shift = x.mean()
    y = x - shift
    s = [np.full(n, float(np.sum(y ** p))) - y ** p for p in (1, 2, 3, 4)]
    m = n - 1
    mu = s[0] / m
    c2 = s[1] - m * mu ** 2
    c3 = s[2] - 3 * mu * s[1] + 2 * m * mu ** 3
    c4 = s[3] - 4 * mu * s[2] + 6 * mu ** 2 * s[1] - 3 * m * mu ** 4
    return m, mu + shift, c2, c3, c4


def jackknife_se(replicates) -> float:
    r = np.asarray(replicates, dtype=float)
    n = r.size
    return float(math.sqrt((n - 1) / n * np.sum((r - r.mean()) ** 2)))


def jackknife(x, statistic) -> tuple[float, float]:
    """Full-sample value of ``statistic`` and its leave-one-out SE (O(n^2))."""
    x = np.asarray(x)
    if x.shape[0] < 2:
        raise InsufficientDataError("jackknife needs at least two samples")
    keep = np.ones(x.shape[0], dtype=bool)
    reps = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        keep[i] = False
        reps[i] = statistic(x[keep])
        keep[i] = True
    return float(statistic(x)), jackknife_se(reps)


@dataclass(frozen=True)
class SampleSummary:
    n_samples: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    se_mean: float
    se_variance: float
    se_skewness: float
    se_excess_kurtosis: float
    min: float
    max: float

    def as_dict(self) -> dict:
        return asdict(self)


def summarize(x) -> SampleSummary:
    """Moments of a 1-D sample with leave-one-out jackknife SEs."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size < 2:
        raise InsufficientDataError("need at least two samples")
    acc = MomentAccumulator.from_array(x)
    m, _, c2, c3, c4 = _loo_power_sums(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        var_i = c2 / (m - 1) if m > 1 else np.full(x.size, np.nan)
        skew_i = np.sqrt(m) * c3 / c2 ** 1.5
        kurt_i = m * c4 / c2 ** 2 - 3.0
    # the jackknife SE of the mean is exactly sd / sqrt(n)
    se_mean = math.sqrt(acc.variance / x.size)
    return SampleSummary(
        n_samples=int(x.size),
        mean=acc.mean,
        variance=acc.variance,
        skewness=acc.skewness,
        excess_kurtosis=acc.excess_kurtosis,
        se_mean=se_mean,
        se_variance=jackknife_se(var_i),
        se_skewness=jackknife_se(skew_i),
        se_excess_kurtosis=jackknife_se(kurt_i),
        min=acc.lo,
        max=acc.hi,
    )
