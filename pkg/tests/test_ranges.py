import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from brwrange.contour import CertificationError, WindowError, tree_distances
from brwrange.ranges import (
    RangeLedger,
    ball_count,
    collision_distances,
    default_truncation,
    range_size,
    xi_k_all,
    y_windowed,
    y_windowed_all,
)
from brwrange.snake import gen_snake, gen_snake_certified, snake_from_steps
from brwrange.streams import replica_seed
from brwrange.mcstats import loglog_slope


def naive_xi(traj, k, n):
    path = traj.path
    out = np.zeros(n, dtype=np.int8)
    for i in range(1, n + 1):
        js = np.arange(-path.back_len, i)
        near = js[tree_distances(path, i, js) <= k]
        same = np.all(traj.pos_index[near + path.offset] == traj.position(i), axis=1)
        out[i - 1] = 0 if same.any() else 1
    return out


def test_ledger_counts_and_idempotence():
    led = RangeLedger(3)
    assert led.add([1, 2, 3]) and not led.add([1, 2, 3])
    assert led.update([[0, 0, 0], [1, 2, 3], [0, 0, 1]]) == 2
    assert len(led) == 3 == len(led.seen)
    assert [0, 0, 1] in led and [1, 0, 0] not in led


def test_ledger_falls_back_to_bytes_for_huge_coordinates():
    led = RangeLedger(20)
    big = np.full(20, 2 ** 40)
    assert led.add(big) and not led.add(big.copy())
    assert led.add(-big)
    assert len(led) == 2


@given(st.lists(st.lists(st.integers(-5, 5), min_size=2, max_size=2), max_size=50))
def test_ledger_matches_python_set(points):
    led = RangeLedger(2)
    led.update(points)
    assert len(led) == len({tuple(p) for p in points})


def test_range_size_examples():
    s = snake_from_steps(1, fwd=(1, -1))
    assert range_size(s, 1) == 1
    assert range_size(s, 2) == 2
    assert range_size(s, 0) == 0
    with pytest.raises(WindowError):
        range_size(s, 3)


def test_range_size_grows_by_at_most_one():
    s = gen_snake(2, 0, 800, 3)
    sizes = np.array([range_size(s, n) for n in range(0, 801, 1)])
    assert set(np.diff(sizes).tolist()) <= {0, 1}
    assert sizes[-1] == len({tuple(p) for p in s.positions(1, 800).tolist()})


def test_y_windowed_definition_and_monotone_in_past():
    s = gen_snake(2, 300, 300, 11)
    n = 300
    fwd = {tuple(p) for p in s.positions(1, n).tolist()}
    assert y_windowed(s, n, 0) == len(fwd - {tuple(s.position(0).tolist())})
    vals = [y_windowed(s, n, m) for m in range(0, 301, 10)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    all_vals = y_windowed_all(s, n, 300)
    assert all_vals[n] == y_windowed(s, n, 300)
    assert all(all_vals[m] == y_windowed(s, m, 300) for m in (0, 1, 17, 150))


def test_y_windowed_window_errors():
    s = gen_snake(2, 5, 5, 0)
    with pytest.raises(WindowError):
        y_windowed(s, 6, 0)
    with pytest.raises(WindowError):
        y_windowed(s, 5, 6)


def test_xi_k0_is_first_visit():
    for seed in range(20):
        s = gen_snake_certified(3, 300, 0, seed)
        xi = xi_k_all(s, 0, 300).values
        tree = s.tree
        first = np.array([tree.first_index_of(tree.vertex(i)) == i for i in range(1, 301)])
        assert np.array_equal(xi.astype(bool), first)


def test_xi_monotone_in_k():
    for seed in range(20):
        s = gen_snake_certified(2 + seed % 4, 400, 16, seed)
        prev = None
        for k in range(17):
            xi = xi_k_all(s, k, 400).values
            assert set(np.unique(xi).tolist()) <= {0, 1}
            if prev is not None:
                assert np.all(xi <= prev)
            prev = xi


def test_xi_matches_naive_scan_and_bfs():
    rng = np.random.default_rng(0)
    for w in range(200):
        n = int(rng.integers(1, 501))
        k = int(rng.choice([0, 1, 2, 4, 8]))
        dim = int(rng.integers(1, 6))
        s = gen_snake_certified(dim, n, k, replica_seed(71, w))
        xi = xi_k_all(s, k, n)
        assert xi.window_certified and len(xi) == n
        assert np.array_equal(xi.values, naive_xi(s, k, n))
        if w < 20:
            assert np.array_equal(xi.values, xi_k_all(s, k, n, method="bfs").values)


def test_window_distances_reproduce_windowed_range():
    checked = 0
    for seed in range(30):
        n = 200 + 60 * seed
        s = gen_snake(1 + seed % 5, 2000 - n, n, replica_seed(72, seed))
        try:
            d = collision_distances(s, 1, n, limit=10 ** 6, certified_radius=0)
        except CertificationError:
            continue
        assert int((d > 10 ** 6).sum()) == y_windowed(s, n, s.back_len)
        checked += 1
    assert checked >= 5


def test_certification_error_reports_depth():
    s = snake_from_steps(2, fwd=(1, 1, -1), bwd=())
    with pytest.raises(CertificationError) as err:
        xi_k_all(s, 2, 3)
    assert err.value.depth_needed > 0
    with pytest.raises(ValueError):
        xi_k_all(s, -1, 3)
    with pytest.raises(ValueError):
        xi_k_all(gen_snake_certified(2, 10, 1, 0), 1, 10, method="grid")


def test_collapsed_past_refuses_exact_windows():
    s = gen_snake_certified(3, 50, 4, 1)
    assert s.path.ceiling is not None and s.back_len
    with pytest.raises(ValueError):
        y_windowed(s, 50, s.back_len)


def test_xi_n_zero():
    s = gen_snake_certified(2, 0, 3, 0, lo=0)
    assert len(xi_k_all(s, 3, 0)) == 0
    assert y_windowed(gen_snake(2, 4, 0, 0), 0, 4) == 0


def test_ball_count_matches_distances():
    for seed in range(15):
        k = 1 + seed % 6
        s = gen_snake_certified(3, 120, k, seed)
        path = s.path
        for i in (1, 40, 120):
            js = np.arange(-path.back_len, i)
            d = tree_distances(path, i, js)
            assert ball_count(s, i, k) == int((d <= k).sum())
            assert ball_count(s, i, k, "=") == int((d == k).sum())
    with pytest.raises(ValueError):
        ball_count(s, 1, 1, "<")


def test_ball_count_k0_counts_previous_visits():
    s = gen_snake_certified(2, 300, 0, 5)
    tree = s.tree
    for i in range(1, 301, 13):
        v = tree.vertex(i)
        assert ball_count(s, i, 0) == int((tree.visits(v) < i).sum())


def test_ball_count_moment_growth():
    ks = np.array([4, 8, 16, 32])
    m_le, m_eq = [], []
    for k in ks:
        le, eq = [], []
        for r in range(600):
            s = gen_snake_certified(1, 0, int(k), replica_seed(73 + int(k), r), lo=0)
            le.append(ball_count(s, 0, int(k)))
            eq.append(ball_count(s, 0, int(k), "="))
        m_le.append(np.mean(np.square(le)))
        m_eq.append(np.mean(np.square(eq)))
    assert loglog_slope(ks, m_le).slope <= 4.3
    assert loglog_slope(ks, m_eq).slope <= 2.3


def test_default_truncation():
    with pytest.raises(ValueError):
        default_truncation(4, 100)
    for dim, n in [(5, 1000), (9, 4096), (17, 16384)]:
        k = default_truncation(dim, n)
        assert n * k ** ((4 - dim) / 2) < 0.01 + 1e-15
        if k > 1:
            assert n * (k - 1) ** ((4 - dim) / 2) >= 0.01


def test_windowed_range_ratio_stabilises_d5():
    ratios = {}
    for n in (2 ** 10, 2 ** 12):
        vals = [y_windowed(gen_snake(5, 8 * n, n, replica_seed(74, r)), n, 8 * n) / n
                for r in range(40)]
        ratios[n] = np.mean(vals)
    assert 0.2 < ratios[2 ** 12] < 1
    assert abs(ratios[2 ** 12] - ratios[2 ** 10]) < 0.05
