"""Closed forms and enumeration oracles."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_ENUMERATION = 16


@dataclass(frozen=True)
class Pmf:
    """Probability mass function on a finite sorted integer support.

    ``tail`` is the mass outside the support that was deliberately left
    out (truncated supports); it is *not* folded back into ``probs``.
    """

    support: np.ndarray
    probs: np.ndarray
    tail: float = 0.0

    def __post_init__(self):
        s = np.asarray(self.support, dtype=np.int64)
        p = np.asarray(self.probs, dtype=float)
        if s.shape != p.shape:
            raise ValueError("support and probs differ in shape")
        if s.size and np.any(np.diff(s) <= 0):
            raise ValueError("support must be sorted and distinct")
        if np.any(p < 0):
            raise ValueError("negative probability")
        if abs(p.sum() + self.tail - 1.0) > 1e-12:
            raise ValueError(f"mass {p.sum() + self.tail!r} is not 1")
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "probs", p)

    def __getitem__(self, x: int) -> float:
        idx = np.searchsorted(self.support, x)
        if idx < self.support.size and self.support[idx] == x:
            return float(self.probs[idx])
        return 0.0

    def as_dict(self) -> dict[int, float]:
        return {int(s): float(p) for s, p in zip(self.support, self.probs)}

    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))


def gw_generating_function(level: int, s: float) -> float:
    """``E[s^{Z_level}]`` for the geometric(1/2) Galton-Watson process."""
    if level < 0:
        raise ValueError("level must be non-negative")
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s={s!r} outside [0, 1]")
    return 1.0 - (1.0 - s) / ((1.0 - s) * level + 1.0)


def gw_generation_pmf(level: int, max_k: int) -> Pmf:
    """Law of ``Z_level`` on ``0..max_k``; the rest is reported as ``tail``.

    ``P(Z=0) = l/(l+1)`` and ``P(Z=k) = l^{k-1}/(l+1)^{k+1}`` for ``k >= 1``.
    """
    if level < 1:
        raise ValueError("level must be at least 1")
    if max_k < 1:
        raise ValueError("max_k must be at least 1")
    ks = np.arange(max_k + 1)
    probs = np.empty(max_k + 1)
    probs[0] = level / (level + 1)
    ratio = level / (level + 1)
    probs[1:] = ratio ** (ks[1:] - 1) / (level + 1) ** 2
    # the excluded tail is geometric: sum_{k>max_k} = ratio**max_k / (level + 1)
    tail = ratio ** max_k / (level + 1)
    return Pmf(ks, probs, tail)


def binomial_pmf(n: int, j: int) -> float:
    """``C(n, j) / 2**n`` by a running product of ratios."""
    if j < 0 or j > n:
        return 0.0
    j = min(j, n - j)
    p = 0.5 ** n
    for t in range(j):
        p *= (n - t) / (t + 1)
    return p


def walk_pmf(n: int, m: int) -> float:
    """``P(C_n = m)`` for the simple random walk from 0."""
    if abs(m) > n or (n + m) % 2:
        return 0.0
    return binomial_pmf(n, (n + m) // 2)


def excursion_pmf(n: int, m: int) -> float:
    """``P(C_n - 2 min_{0<=i<=n} C_i = m) = 2(m+1)^2/(n+m+2) P(C_n = m)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if m < 0:
        return 0.0
    return 2.0 * (m + 1) ** 2 / (n + m + 2) * walk_pmf(n, m)


def excursion_distribution(n: int) -> Pmf:
    support = np.arange(n % 2, n + 1, 2)
    return Pmf(support, np.array([excursion_pmf(n, int(m)) for m in support]))


def brute_force_excursion_pmf(n: int) -> Pmf:
    """Exact law of ``C_n - 2 min C`` by listing all ``2**n`` paths."""
    if n > MAX_ENUMERATION:
        raise MemoryError(f"enumeration of 2**{n} paths refused (limit 2**{MAX_ENUMERATION})")
    if n < 0:
        raise ValueError("n must be non-negative")
    paths = np.arange(2 ** n, dtype=np.int64)
    steps = 2 * ((paths[:, None] >> np.arange(n)) & 1) - 1
    walk = np.concatenate((np.zeros((paths.size, 1), dtype=np.int64), np.cumsum(steps, axis=1)), axis=1)
    stat = walk[:, -1] - 2 * walk.min(axis=1)
    values, counts = np.unique(stat, return_counts=True)
    return Pmf(values, counts / 2 ** n)


# Abramowitz & Stegun 26.2.17, |error| < 7.5e-8
_AS_P = 0.2316419
_AS_B = (0.319381530, -0.356563782, 1.781477937, -1.821255978, 1.330274429)


def normal_cdf(x: float) -> float:
    """Standard normal distribution function, absolute error below 1e-7."""
    if not math.isfinite(x):
        raise ValueError("x must be finite")
    z = abs(x)
    t = 1.0 / (1.0 + _AS_P * z)
    poly = t * (_AS_B[0] + t * (_AS_B[1] + t * (_AS_B[2] + t * (_AS_B[3] + t * _AS_B[4]))))
    upper = math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi) * poly
    return 1.0 - upper if x >= 0 else upper


NORMAL_MOMENTS = {1: 0.0, 2: 1.0, 3: 0.0, 4: 3.0}


def gaussian_reference(moment_order: int | None = None, x: float | None = None) -> float:
    """Raw moment of order 1..4 of N(0,1), or its cdf at ``x``."""
    if (moment_order is None) == (x is None):
        raise ValueError("pass exactly one of moment_order and x")
    if x is not None:
        return normal_cdf(x)
    if moment_order not in NORMAL_MOMENTS:
        raise ValueError("moment order must be 1..4")
    return NORMAL_MOMENTS[moment_order]
