"""Acceptance checks, one test per criterion, at full size.

Every Monte Carlo check uses ``SEED + i`` for criterion ``i`` so no two
experiments share streams.  Thresholds are fixed here and never tuned to
the data.
"""
import time

import numpy as np
import pytest

from brwrange import analytic, cli
from brwrange.badpoints import pathwise_violations
from brwrange.contour import gen_contour, reconstruct_tree, tree_distances
from brwrange.mcstats import (
    XiSumKernel,
    bad_gap_battery,
    bad_rate,
    clt_battery,
    covariance_curve,
    fourth_moment_from_samples,
    hitting_curve,
    run_replicas,
    truncation_bias_curve,
    variance_curve,
)
from brwrange.mcstats.experiments import Z99
from brwrange.ranges import xi_k_all
from brwrange.snake import gen_snake, gen_snake_certified
from brwrange.streams import replica_seed

SEED = 20260801


def naive_xi(traj, k, n):
    path = traj.path
    out = np.zeros(n, dtype=np.int8)
    for i in range(1, n + 1):
        js = np.arange(-path.back_len, i)
        near = js[tree_distances(path, i, js) <= k]
        same = np.all(traj.pos_index[near + path.offset] == traj.position(i), axis=1)
        out[i - 1] = 0 if same.any() else 1
    return out


def convolved_generations(levels, size=64):
    offspring = 0.5 ** (np.arange(size) + 1)
    law = np.zeros(size)
    law[1] = 1.0
    for _ in range(levels):
        new = np.zeros(size)
        power = np.zeros(size)
        power[0] = 1.0
        for z in range(size):
            new += law[z] * power
            power = np.convolve(power, offspring)[:size]
        law = new
    return law


def test_01_excursion_pmf_exact():
    t0 = time.perf_counter()
    worst = 0.0
    for n in range(1, 15):
        brute = analytic.brute_force_excursion_pmf(n)
        for m in range(n + 1):
            worst = max(worst, abs(brute[m] - analytic.excursion_pmf(n, m)))
    assert worst <= 1e-12
    assert time.perf_counter() - t0 < 5


def test_02_generating_function_exact():
    for level in range(1, 5):
        ref = convolved_generations(level)
        pmf = analytic.gw_generation_pmf(level, 32)
        assert np.max(np.abs(pmf.probs - ref[:33])) <= 1e-10
    worst = 0.0
    for s in np.random.default_rng(SEED + 2).random(100):
        for level in range(8):
            lhs = analytic.gw_generating_function(level + 1, s)
            rhs = analytic.gw_generating_function(1, analytic.gw_generating_function(level, s))
            worst = max(worst, abs(lhs - rhs))
    assert worst <= 1e-12


def test_03_distance_formula_equals_bfs():
    t0 = time.perf_counter()
    mismatches = 0
    for w in range(1000):
        seed = replica_seed(SEED + 3, w)
        path = gen_contour(100, 100, seed)
        tree = reconstruct_tree(path)
        idx = np.arange(-100, 101)
        for src in np.random.default_rng(seed).integers(-100, 101, size=3):
            bfs = tree.bfs_distances(tree.vertex(int(src)))
            truth = np.array([bfs[int(v)] for v in tree.vertex_of])
            mismatches += int(np.count_nonzero(tree_distances(path, np.full(idx.size, src), idx) != truth))
    assert mismatches == 0
    assert time.perf_counter() - t0 < 10


def test_04_xi_equals_naive_scan():
    rng = np.random.default_rng(SEED + 4)
    mismatches = 0
    for w in range(200):
        n = int(rng.integers(1, 501))
        dim = int(rng.integers(1, 10))
        for k in (0, 1, 2, 4, 8):
            s = gen_snake_certified(dim, n, k, replica_seed(SEED + 4, 10 * w + k))
            mismatches += int(np.count_nonzero(xi_k_all(s, k, n).values != naive_xi(s, k, n)))
    assert mismatches == 0


@pytest.mark.parametrize("dim", [1, 2, 5])
def test_05_bad_point_rate(dim):
    t0 = time.perf_counter()
    rate = bad_rate(dim, 500, 2000, SEED + 5)
    q = 1 / (8 * dim)
    assert rate.trials == 10 ** 6
    for est in (rate.rate, rate.rate_spine, rate.rate_off_spine):
        assert abs(est.value - q) <= 4 * est.stderr
    assert time.perf_counter() - t0 < 60


@pytest.fixture(scope="module")
def gap_battery():
    return bad_gap_battery(5, 1000, 10 ** 4, SEED + 6)


def test_06_pathwise_identity(gap_battery):
    assert gap_battery.violations == 0


def test_06_pathwise_identity_deep_past():
    # same identity with a long exact past, so the past overlaps the future
    total = 0
    for r in range(200):
        s = gen_snake(5, 20_000, 1200, replica_seed(SEED + 6, 10 ** 5 + r))
        total += pathwise_violations(s, 1000, 20_000)
    assert total == 0


def test_07_gap_law_and_independence(gap_battery):
    b = gap_battery
    assert b.q == 1 / 40
    assert b.chisquare.pvalue > 1e-3
    assert abs(b.corr.value) <= 4 * b.corr.stderr
    assert abs(b.mean_gap.value - 1 / 39) <= 4 * b.mean_gap.stderr


@pytest.mark.slow
def test_08_truncation_bias_decay():
    curve = truncation_bias_curve(9, (2, 4, 8, 16), 64, 10 ** 5, SEED + 8)
    assert curve.fit is not None
    assert curve.fit.slope <= -(9 - 4) / 2 + 0.5


GRID = (2 ** 10, 2 ** 11, 2 ** 12, 2 ** 13, 2 ** 14)


@pytest.fixture(scope="module")
def d17_run():
    t0 = time.perf_counter()
    samples = run_replicas(XiSumKernel(17, 16, GRID), 10 ** 4, SEED + 9)
    return samples, time.perf_counter() - t0


@pytest.mark.slow
def test_09_linear_variance(d17_run):
    samples, elapsed = d17_run
    cols = [GRID.index(n) for n in (2 ** 10, 2 ** 12, 2 ** 14)]
    curve = variance_curve(samples[:, cols], (2 ** 10, 2 ** 12, 2 ** 14))
    assert curve.plateau_ratio <= 1.15
    assert curve.kappa_hat.value - Z99 * curve.kappa_hat.stderr > 0
    assert elapsed <= 15 * 60


@pytest.mark.slow
def test_10_clt(d17_run):
    samples, _ = d17_run
    d = clt_battery(samples[:, GRID.index(2 ** 14)])
    assert abs(d.skewness) < 0.15
    assert abs(d.excess_kurtosis) < 0.3
    assert d.ks_distance < 0.03


@pytest.mark.slow
def test_11_covariance_decay():
    lags = (0, 4, 8, 16, 32, 64, 128, 256)
    curve = covariance_curve(9, 4, lags, 10 ** 5, SEED + 11, window=4096)
    assert 0 <= curve.cov[0] <= 0.25
    assert curve.fit is not None
    assert curve.fit.slope <= -1.2
    change = curve.partial_change(128, 256)
    assert change.value < 2 * change.stderr


@pytest.mark.slow
def test_12_fourth_moment(d17_run):
    samples, _ = d17_run
    curve = fourth_moment_from_samples(samples, GRID)
    assert curve.fit.slope <= 2.2


@pytest.mark.slow
def test_13_hitting_probability_decay():
    curve = hitting_curve(5, (4, 8, 16, 32, 64, 128, 256), 10 ** 6, SEED + 13)
    assert curve.fit is not None
    assert curve.fit.slope <= -(5 - 2) / 2 + 0.3


SMALL = {
    "oracles": [],
    "contour": ["--n", "60", "--replicas", "40"],
    "variance": ["--dim", "5", "--n-grid", "32,64", "--k", "2", "--replicas", "120"],
    "clt": ["--dim", "5", "--n-grid", "32,64", "--k", "2", "--replicas", "120"],
    "fourth-moment": ["--dim", "5", "--n-grid", "32,64", "--k", "2", "--replicas", "120"],
    "covariance": ["--dim", "5", "--n", "300", "--k", "2", "--replicas", "40"],
    "truncation": ["--dim", "9", "--k", "12", "--replicas", "200"],
    "badpoints": ["--dim", "2", "--n", "60", "--replicas", "120"],
}


@pytest.mark.parametrize("name", sorted(SMALL))
def test_14_reports_identical_across_workers(tmp_path, name):
    bodies = []
    for workers in (1, 4, 8):
        out = tmp_path / f"{workers}.json"
        argv = ["--experiment", name, *SMALL[name], "--workers", str(workers),
                "--format", "json", "--seed", str(SEED + 14), "--out", str(out)]
        assert cli.main(argv) == cli.EXIT_OK
        bodies.append(out.read_bytes())
    assert bodies[0] == bodies[1] == bodies[2]
