"""Replica kernels and the Monte Carlo curves built from them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ..badpoints import bad_flags, pathwise_violations, prune, y_hat
from ..contour import default_back_cap
from ..ranges import collision_distances, subtree_hits
from ..snake import gen_snake, gen_snake_certified
from .diagnostics import (
    CltDiagnostics,
    ChiSquare,
    InsufficientDataError,
    SlopeFit,
    clt_battery,
    geometric_chisquare,
    independence_test,
    loglog_slope,
)
from .moments import _loo_power_sums, jackknife_se, summarize
from .runner import run_replicas

Z99 = float(stats.norm.isf(0.005))


def _check_grid(n_grid) -> np.ndarray:
    grid = np.asarray(n_grid, dtype=np.int64)
    if grid.ndim != 1 or grid.size == 0 or np.any(grid < 1) or np.any(np.diff(grid) <= 0):
        raise ValueError("n_grid must be a non-empty increasing list of positive counts")
    return grid


# ---------------------------------------------------------------- kernels

def _xi_snake(dim, n, k, streams, enlarge, past, lo):
    """Certified snake (``past=None``) or one with a fixed past of length
    ``past * enlarge``; the ξ computation itself checks the latter."""
    if past is None:
        return gen_snake_certified(dim, n, k, streams, lo=lo,
                                   max_back=enlarge * default_back_cap(n, k))
    return gen_snake(dim, past * enlarge, n, streams)


@dataclass(frozen=True)
class XiSumKernel:
    """``sum_{i<=n} ξ_i^k`` at every grid value of one certified snake."""

    dim: int
    k: int
    n_grid: tuple
    past: int | None = None

    def __call__(self, streams, enlarge=1):
        n = int(self.n_grid[-1])
        traj = _xi_snake(self.dim, n, self.k, streams, enlarge, self.past, lo=1)
        xi = collision_distances(traj, 1, n, self.k) > self.k
        sums = np.cumsum(xi)
        return sums[np.asarray(self.n_grid) - 1]


@dataclass(frozen=True)
class LagProductKernel:
    """Mean of ``ξ_0^k`` and of ``ξ_i^k ξ_{i+lag}^k`` along one window.

    Row layout: ``[mean ξ, mean ξ_i ξ_{i+lag} for each lag]``; lag 0 gives
    the mean of ``ξ^2``.
    """

    dim: int
    k: int
    lags: tuple
    window: int
    past: int | None = None

    def __call__(self, streams, enlarge=1):
        n = self.window
        traj = _xi_snake(self.dim, n, self.k, streams, enlarge, self.past, lo=0)
        x = (collision_distances(traj, 0, n, self.k) > self.k).astype(np.float64)
        out = np.empty(len(self.lags) + 1)
        out[0] = x.mean()
        for j, lag in enumerate(self.lags):
            out[j + 1] = np.dot(x[: x.size - lag], x[lag:]) / (x.size - lag)
        return out


@dataclass(frozen=True)
class CollisionDistanceKernel:
    """Indicators ``1{k < D_0 <= k_max}`` for each ``k`` in ``ks``, where
    ``D_0`` is the distance from ``u_0`` to the nearest earlier vertex at
    the same position.  Their means are ``E[ξ_0^k - ξ_0^{k_max}]``."""

    dim: int
    ks: tuple
    k_max: int

    def __call__(self, streams, enlarge=1):
        traj = gen_snake_certified(self.dim, 0, self.k_max, streams, lo=0,
                                   max_back=enlarge * default_back_cap(0, self.k_max))
        d0 = int(collision_distances(traj, 0, 0, self.k_max)[0])
        return np.array([float(k < d0 <= self.k_max) for k in self.ks])


@dataclass(frozen=True)
class SubtreeHitKernel:
    """Flags ``0 ∈ V(T_j^-)`` for each spine level ``j``."""

    dim: int
    js: tuple
    max_generation: int = 4096

    def __call__(self, streams):
        hits, _ = subtree_hits(self.dim, self.js, streams, self.max_generation)
        return hits.astype(np.float64)


def pruning_length(dim: int, horizon: int) -> int:
    """Forward length that holds ``horizon`` kept steps with a wide margin."""
    mean_bad = (horizon // 2 + 1) / (8 * dim - 1)
    return int(horizon + 2 * math.ceil(4 * mean_bad + 8 * math.sqrt(mean_bad + 1)) + 2)


@dataclass(frozen=True)
class BadGapKernel:
    """Gaps ``X_0..X_{n//2}``, then ``N_n``, ``Ŷ_n`` and the number of
    ``m <= n`` violating ``Ỹ(m + 2N_m) = Ŷ(m)``."""

    dim: int
    n: int
    past: int

    def __call__(self, streams, enlarge=1):
        fwd = pruning_length(self.dim, self.n) * enlarge
        traj = gen_snake(self.dim, self.past, fwd, streams)
        pruned = prune(traj, self.n)
        viol = pathwise_violations(traj, self.n, self.past)
        tail = [pruned.n_bad(self.n), y_hat(pruned, self.n, self.past), viol]
        return np.concatenate((pruned.gaps, tail))


@dataclass(frozen=True)
class BadRateKernel:
    """Bad-pair indicators of the first ``pairs`` pairs and whether
    ``u_{2i-2}`` sat on the spine (the step back leads down the spine or to
    the phantom instead of to a parent in ``T^+``)."""

    dim: int
    pairs: int

    def __call__(self, streams):
        traj = gen_snake(self.dim, 0, 2 * self.pairs, streams)
        flags = bad_flags(traj, self.pairs)
        fwd = traj.path.values[traj.path.offset:]
        even = fwd[0: 2 * self.pairs: 2]
        on_spine = even == np.minimum.accumulate(fwd)[0: 2 * self.pairs: 2]
        return np.concatenate((flags, on_spine)).astype(np.float64)


# ----------------------------------------------------------------- curves

@dataclass
class Estimate:
    value: float
    stderr: float

    def ci(self, z: float = Z99) -> tuple[float, float]:
        return self.value - z * self.stderr, self.value + z * self.stderr


@dataclass
class KappaCurve:
    n_grid: np.ndarray
    var_over_n: list
    plateau_ratio: float
    kappa_hat: Estimate
    samples: np.ndarray = field(repr=False)

    def ci_excludes_zero(self, z: float = Z99) -> bool:
        return self.kappa_hat.ci(z)[0] > 0


def variance_curve(samples: np.ndarray, n_grid) -> KappaCurve:
    """``Var(S_n)/n`` with jackknife SEs from a replicas x grid sample."""
    grid = _check_grid(n_grid)
    samples = np.asarray(samples, dtype=float).reshape(-1, grid.size)
    points = []
    for j, n in enumerate(grid):
        s = summarize(samples[:, j])
        points.append(Estimate(s.variance / n, s.se_variance / n))
    vals = np.array([p.value for p in points])
    if vals.size < 2 or np.all(vals == 0):
        plateau = 1.0
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.maximum(vals[1:] / vals[:-1], vals[:-1] / vals[1:])
        plateau = float(np.nanmax(ratios))
    return KappaCurve(grid, points, plateau, points[-1], samples)


def xi_sum_samples(dim: int, n_grid, k: int, replicas: int, seed: int, *,
                   workers=None, kernel=None, past=None) -> np.ndarray:
    """Replicas x grid array of ``sum_{i<=n} ξ_i^k``."""
    grid = _check_grid(n_grid)
    if kernel is None:
        if dim < 5:
            raise ValueError("the ξ-sum experiments need d >= 5")
        kernel = XiSumKernel(dim, k, tuple(int(n) for n in grid), past)
    return run_replicas(kernel, replicas, seed, workers=workers).reshape(replicas, grid.size)


def kappa_curve(dim: int, n_grid, k: int, replicas: int, seed: int, *,
                workers=None, kernel=None, past=None) -> KappaCurve:
    """``Var(sum_{i<=n} ξ_i^k)/n`` over ``n_grid``; ``κ̂`` is the last point."""
    samples = xi_sum_samples(dim, n_grid, k, replicas, seed, workers=workers,
                             kernel=kernel, past=past)
    return variance_curve(samples, n_grid)


def clt_curve(samples: np.ndarray, n_grid) -> list[CltDiagnostics]:
    grid = _check_grid(n_grid)
    samples = np.asarray(samples, dtype=float).reshape(-1, grid.size)
    return [clt_battery(samples[:, j]) for j in range(grid.size)]


@dataclass
class FourthMomentCurve:
    n_grid: np.ndarray
    fourth: list
    ratio: list
    fit: SlopeFit | None


def fourth_moment_from_samples(samples: np.ndarray, n_grid) -> FourthMomentCurve:
    """Centered fourth moment of ``S_n`` and ``Ê⟨S_n⟩^4 / n^2``."""
    grid = _check_grid(n_grid)
    samples = np.asarray(samples, dtype=float).reshape(-1, grid.size)
    fourth, ratio = [], []
    for j, n in enumerate(grid):
        x = samples[:, j]
        c = x - x.mean()
        m4 = float(np.mean(c ** 4))
        m, _, _, _, c4 = _loo_power_sums(x)
        se = jackknife_se(c4 / m)
        fourth.append(Estimate(m4, se))
        ratio.append(Estimate(m4 / n ** 2, se / n ** 2))
    vals = np.array([e.value for e in fourth])
    fit = loglog_slope(grid, vals) if grid.size >= 2 and np.all(vals > 0) else None
    return FourthMomentCurve(grid, fourth, ratio, fit)


def fourth_moment_curve(dim: int, n_grid, k: int, replicas: int, seed: int, *,
                        workers=None, kernel=None, past=None) -> FourthMomentCurve:
    samples = xi_sum_samples(dim, n_grid, k, replicas, seed, workers=workers,
                             kernel=kernel, past=past)
    return fourth_moment_from_samples(samples, n_grid)


@dataclass
class CovarianceCurve:
    lags: np.ndarray
    cov: np.ndarray
    stderr: np.ndarray
    mean_xi: Estimate
    variance: Estimate
    fit: SlopeFit | None
    fit_lags: np.ndarray
    partial_sums: np.ndarray
    partial_stderr: np.ndarray

    def partial_change(self, lo_lag: int, hi_lag: int) -> Estimate:
        """Increase of ``sum |Ĉov|`` over grid lags from ``lo_lag`` to ``hi_lag``."""
        sel = (self.lags > lo_lag) & (self.lags <= hi_lag)
        value = float(np.abs(self.cov[sel]).sum())
        return Estimate(value, float(np.sqrt(np.sum(self.stderr[sel] ** 2))))


def covariance_from_rows(rows: np.ndarray, lags, significance: float = 4.0) -> CovarianceCurve:
    """Plug-in covariances ``mean(ξ_i ξ_{i+lag}) - mean(ξ)^2`` with
    leave-one-replica-out jackknife SEs.

    The log-log slope of ``|Ĉov|`` uses the grid lags where ``|Ĉov|``
    exceeds ``significance`` standard errors.
    """
    lags = np.asarray(lags, dtype=np.int64)
    rows = np.asarray(rows, dtype=float)
    r = rows.shape[0]
    if r < 2:
        raise InsufficientDataError("covariances need at least two replicas")
    mean = rows.mean(axis=0)
    cov = mean[1:] - mean[0] ** 2
    loo = (mean[None, :] * r - rows) / (r - 1)
    loo_cov = loo[:, 1:] - loo[:, :1] ** 2
    se = np.sqrt((r - 1) / r * np.sum((loo_cov - loo_cov.mean(axis=0)) ** 2, axis=0))
    var_loo = loo[:, 0] - loo[:, 0] ** 2
    variance = Estimate(float(mean[0] - mean[0] ** 2), jackknife_se(var_loo))
    mean_xi = Estimate(float(mean[0]), float(rows[:, 0].std(ddof=1) / math.sqrt(r)))
    pos = lags > 0
    sig = pos & (np.abs(cov) > significance * se)
    fit = None
    if np.count_nonzero(sig) >= 2:
        fit = loglog_slope(lags[sig], np.abs(cov[sig]))
    absc = np.where(pos, np.abs(cov), 0.0)
    partial = np.cumsum(absc)
    partial_se = np.sqrt(np.cumsum(np.where(pos, se, 0.0) ** 2))
    return CovarianceCurve(lags, cov, se, mean_xi, variance, fit, lags[sig], partial, partial_se)


def covariance_curve(dim: int, k: int, lags, replicas: int, seed: int, *,
                     window: int | None = None, workers=None,
                     significance: float = 4.0, past=None) -> CovarianceCurve:
    """``Ĉov(ξ_0^k, ξ_lag^k)`` pooled over all index pairs of each window."""
    lags = np.asarray(lags, dtype=np.int64)
    if np.any(lags < 0):
        raise ValueError("lags must be non-negative")
    if window is None:
        window = max(16 * int(lags.max()), 1024)
    if window <= lags.max():
        raise ValueError("window must be longer than the largest lag")
    kernel = LagProductKernel(dim, k, tuple(int(l) for l in lags), int(window), past)
    rows = run_replicas(kernel, replicas, seed, workers=workers)
    return covariance_from_rows(rows, lags, significance)


@dataclass
class BiasCurve:
    ks: np.ndarray
    k_max: int
    bias: list
    fit: SlopeFit | None


def truncation_bias_curve(dim: int, ks, k_max: int, replicas: int, seed: int, *,
                          workers=None) -> BiasCurve:
    """``E[ξ_0^k - ξ_0^{k_max}]`` for each ``k``."""
    ks = np.asarray(ks, dtype=np.int64)
    if np.any(ks >= k_max) or np.any(ks < 0):
        raise ValueError("every k must lie in [0, k_max)")
    kernel = CollisionDistanceKernel(dim, tuple(int(k) for k in ks), int(k_max))
    rows = run_replicas(kernel, replicas, seed, workers=workers)
    means = rows.mean(axis=0)
    ses = rows.std(axis=0, ddof=1) / math.sqrt(rows.shape[0])
    bias = [Estimate(float(m), float(s)) for m, s in zip(means, ses)]
    fit = loglog_slope(ks, means) if np.all(means > 0) else None
    return BiasCurve(ks, k_max, bias, fit)


@dataclass
class HittingCurve:
    js: np.ndarray
    prob: list
    fit: SlopeFit | None


def hitting_curve(dim: int, js, replicas: int, seed: int, *, workers=None,
                  max_generation: int = 4096) -> HittingCurve:
    """``P(0 ∈ V(T_j^-))`` for each spine level ``j``."""
    js = np.asarray(js, dtype=np.int64)
    kernel = SubtreeHitKernel(dim, tuple(int(j) for j in js), max_generation)
    rows = run_replicas(kernel, replicas, seed, workers=workers)
    means = rows.mean(axis=0)
    ses = rows.std(axis=0, ddof=1) / math.sqrt(rows.shape[0])
    prob = [Estimate(float(m), float(s)) for m, s in zip(means, ses)]
    fit = loglog_slope(js, means) if np.all(means > 0) else None
    return HittingCurve(js, prob, fit)


@dataclass
class BadGapBattery:
    dim: int
    n: int
    q: float
    chisquare: ChiSquare
    mean_gap: Estimate
    corr: Estimate
    mean_bad_per_step: Estimate
    var_bad_per_step: Estimate
    violations: int
    median_test: ChiSquare | None
    reference: dict

    @property
    def expected_mean_gap(self) -> float:
        return self.q / (1.0 - self.q)


def gap_constants(dim: int, n: int) -> dict:
    """Gap-law constants: the exact finite-``n`` values for the geometric
    convention ``P(X=x) = (1-q)q^x``, ``q = 1/(8d)``, and the constants
    ``λ = 1/(2(8d-1))``, ``σ^2 = 32d^2 - 4d`` quoted in the literature."""
    q = 1.0 / (8 * dim)
    terms = n // 2 + 1
    return {
        "q": q,
        "mean_gap": q / (1 - q),
        "var_gap": q / (1 - q) ** 2,
        "mean_bad_per_step": terms * q / (1 - q) / n,
        "var_bad_per_step": terms * q / (1 - q) ** 2 / n,
        "lambda_quoted": 1.0 / (2 * (8 * dim - 1)),
        "sigma2_quoted": 32.0 * dim ** 2 - 4.0 * dim,
    }


def _corr_jackknife(a: np.ndarray, b: np.ndarray) -> Estimate:
    r = a.size
    sa, sb = a.sum(), b.sum()
    saa, sbb, sab = (a * a).sum(), (b * b).sum(), (a * b).sum()

    def corr(n, s1, s2, s11, s22, s12):
        cov = s12 - s1 * s2 / n
        v1 = s11 - s1 * s1 / n
        v2 = s22 - s2 * s2 / n
        with np.errstate(divide="ignore", invalid="ignore"):
            return cov / np.sqrt(v1 * v2)

    full = float(corr(r, sa, sb, saa, sbb, sab))
    loo = corr(r - 1, sa - a, sb - b, saa - a * a, sbb - b * b, sab - a * b)
    return Estimate(full, jackknife_se(loo))


def bad_gap_battery(dim: int, n: int, replicas: int, seed: int, *, past: int | None = None,
                    workers=None) -> BadGapBattery:
    """Gap law, independence from the pruned range and the moments of ``N_n``."""
    if past is None:
        past = n
    kernel = BadGapKernel(dim, n, past)
    rows = run_replicas(kernel, replicas, seed, workers=workers)
    gaps = rows[:, : n // 2 + 1].astype(np.int64)
    n_bad, yh, viol = rows[:, -3], rows[:, -2], rows[:, -1]
    q = 1.0 / (8 * dim)
    chi = geometric_chisquare(gaps.ravel(), q)
    mean_gap = Estimate(float(gaps[:, 0].mean()), float(gaps[:, 0].std(ddof=1) / math.sqrt(replicas)))
    corr = _corr_jackknife(n_bad, yh)
    per = n_bad / n
    s = summarize(per) if replicas > 1 else None
    mean_bad = Estimate(float(per.mean()), s.se_mean if s else math.nan)
    var_bad = Estimate(float(n_bad.var(ddof=1) / n) if replicas > 1 else math.nan,
                       s.se_variance * n if s else math.nan)
    median_test = None
    try:
        median_test = independence_test(n_bad > np.median(n_bad), yh > np.median(yh), min_events=100)
    except InsufficientDataError:
        pass
    return BadGapBattery(dim, n, q, chi, mean_gap, corr, mean_bad, var_bad,
                         int(viol.sum()), median_test, gap_constants(dim, n))


@dataclass
class BadRate:
    dim: int
    trials: int
    rate: Estimate
    rate_spine: Estimate
    rate_off_spine: Estimate


def _bernoulli(x: np.ndarray) -> Estimate:
    m = float(x.mean()) if x.size else math.nan
    return Estimate(m, math.sqrt(m * (1 - m) / x.size) if x.size else math.nan)


def bad_rate(dim: int, pairs: int, replicas: int, seed: int, *, workers=None) -> BadRate:
    """Frequency of bad pairs, overall and split by where ``u_{2i-2}`` sits."""
    rows = run_replicas(BadRateKernel(dim, pairs), replicas, seed, workers=workers)
    flags = rows[:, :pairs].ravel()
    spine = rows[:, pairs:].ravel().astype(bool)
    return BadRate(dim, flags.size, _bernoulli(flags), _bernoulli(flags[spine]),
                   _bernoulli(flags[~spine]))
