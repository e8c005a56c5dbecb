from collections import deque

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from brwrange.analytic import excursion_pmf
from brwrange.contour import (
    CertificationError,
    ContourPath,
    SparseTable,
    WindowError,
    contour_from_increments,
    excursion_statistic,
    gen_contour,
    gen_contour_certified,
    reconstruct_tree,
    tree_distance,
    tree_distances,
)
from brwrange.streams import replica_seed

steps = st.lists(st.sampled_from([1, -1]), max_size=60)


def naive_graph(path):
    """Vertex classes and adjacency from the raw identification rule."""
    vals = path.values
    n = vals.size
    label = [-1] * n
    nxt = 0
    for p in range(n):
        for q in range(p):
            if vals[q] == vals[p] and vals[q:p + 1].min() == vals[p]:
                label[p] = label[q]
                break
        if label[p] < 0:
            label[p] = nxt
            nxt += 1
    adj = {v: set() for v in range(nxt)}
    for p in range(n - 1):
        a, b = label[p], label[p + 1]
        adj[a].add(b)
        adj[b].add(a)
    return label, adj


def bfs(adj, src):
    dist = {src: 0}
    queue = deque([src])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


SMALL_PAST = dict(fwd=(), bwd=(1, -1, -1, 1, -1))


def test_small_past_example():
    path = contour_from_increments(**SMALL_PAST)
    assert path.values.tolist() == [-1, 0, -1, 0, 1, 0]
    assert tree_distance(path, -5, -3) == 0
    tree = reconstruct_tree(path)
    assert tree.vertex(-2) == tree.vertex(0) == tree.root
    assert tree.vertex(-5) == tree.vertex(-3) == tree.spine[1]
    assert tree.spine_level[tree.vertex(-3)] == 1


def test_empty_window():
    path = gen_contour(0, 0, 1)
    assert path.values.tolist() == [0]
    tree = reconstruct_tree(path)
    assert tree.n_vertices == 1


def test_single_excursion():
    tree = reconstruct_tree(contour_from_increments(fwd=(1, -1)))
    assert tree.n_vertices == 2
    child = tree.vertex(1)
    assert tree.parent[child] == tree.root
    assert len(tree.children(child)) == 0 and tree.is_complete(child)


def test_path_of_three():
    tree = reconstruct_tree(contour_from_increments(fwd=(1, 1)))
    assert tree.n_vertices == 3
    assert [int(tree.depth[tree.vertex(i)]) for i in range(3)] == [0, 1, 2]


def test_excursion_statistic_examples():
    assert excursion_statistic(contour_from_increments(fwd=(1, -1)), 0) == 0
    assert excursion_statistic(contour_from_increments(fwd=(1, -1)), 2) == 0
    assert excursion_statistic(contour_from_increments(fwd=(-1, -1)), 2) == 2


def test_contour_validation():
    with pytest.raises(ValueError):
        ContourPath(np.array([0, 2]), 0)
    with pytest.raises(ValueError):
        ContourPath(np.array([1, 0]), 0)
    with pytest.raises(ValueError):
        gen_contour(-1, 3, 0)


def test_window_errors():
    path = gen_contour(3, 4, 0)
    with pytest.raises(WindowError):
        tree_distance(path, -4, 0)
    with pytest.raises(WindowError):
        path.value(5)
    with pytest.raises(WindowError):
        tree_distances(path, [0], [9])


def test_generated_increments_are_unit_steps():
    for seed in range(20):
        path = gen_contour(50, 50, seed)
        assert set(np.unique(path.increments)) <= {-1, 1}
        assert path.value(0) == 0


def test_forward_does_not_depend_on_past_length():
    a = gen_contour(10, 40, 3)
    b = gen_contour(500, 40, 3)
    assert np.array_equal(a.values[a.offset:], b.values[b.offset:])
    assert np.array_equal(a.values[: a.offset + 1], b.values[b.offset - 10: b.offset + 1])


def test_p_c2_zero():
    reps = 200_000
    hits = 0
    for i in range(reps):
        path = gen_contour(0, 2, replica_seed(17, i))
        hits += path.values[-1] == 0
    se = np.sqrt(0.25 / reps)
    assert abs(hits / reps - 0.5) <= 4 * se


def test_distance_formula_matches_bfs():
    rng = np.random.default_rng(0)
    for seed in range(60):
        back = int(rng.integers(0, 100))
        path = gen_contour(back, 100 - back, seed)
        label, adj = naive_graph(path)
        idx = np.arange(-back, 100 - back + 1)
        for src in rng.choice(idx, 5):
            d = bfs(adj, label[path.pos(int(src))])
            truth = [d[label[path.pos(int(j))]] for j in idx]
            assert tree_distances(path, np.full(idx.size, src), idx).tolist() == truth


@given(steps, steps)
def test_reconstruction_matches_naive_identification(fwd, bwd):
    path = contour_from_increments(fwd, bwd)
    tree = reconstruct_tree(path)
    label, adj = naive_graph(path)
    # same partition of indices
    mapping = {}
    for p, lab in enumerate(label):
        assert mapping.setdefault(lab, int(tree.vertex_of[p])) == int(tree.vertex_of[p])
    assert len(mapping) == tree.n_vertices
    for lab, v in mapping.items():
        assert {mapping[w] for w in adj[lab]} == set(tree.neighbors(v))


@given(steps, steps, st.data())
def test_triangle_inequality(fwd, bwd, data):
    path = contour_from_increments(fwd, bwd)
    lo, hi = -path.back_len, path.fwd_len
    i, j, k = sorted(data.draw(st.lists(st.integers(lo, hi), min_size=3, max_size=3)))
    assert tree_distance(path, i, k) <= tree_distance(path, i, j) + tree_distance(path, j, k)
    assert tree_distance(path, i, j) == tree_distance(path, j, i)


@given(steps, steps)
def test_zero_distance_iff_same_vertex(fwd, bwd):
    path = contour_from_increments(fwd, bwd)
    tree = reconstruct_tree(path)
    idx = path.indices
    for i in idx[::3]:
        same = tree.vertex_of == tree.vertex_of[path.pos(int(i))]
        zero = tree_distances(path, np.full(idx.size, i), idx) == 0
        assert np.array_equal(same, zero)


def test_rmq_random_queries():
    rng = np.random.default_rng(1)
    for seed in range(5):
        path = gen_contour(700, 800, seed)
        table = SparseTable(path.values)
        lo = rng.integers(0, len(path), 10_000)
        hi = rng.integers(0, len(path), 10_000)
        lo, hi = np.minimum(lo, hi), np.maximum(lo, hi)
        naive = np.array([path.values[a:b + 1].min() for a, b in zip(lo, hi)])
        assert np.array_equal(table.query_many(lo, hi), naive)


def test_spine_marks_backward_minima():
    for seed in range(10):
        path = gen_contour(400, 50, seed)
        tree = reconstruct_tree(path)
        back = path.values[: path.offset + 1][::-1]
        for level in range(1, -int(back.min()) + 1):
            first = int(np.argmax(back == -level))
            v = tree.vertex(-first)
            assert tree.spine_level[v] == level
            assert tree.depth[v] == -level


def test_visit_counts_equal_degree_for_complete_vertices():
    for seed in range(10):
        path = gen_contour(300, 300, seed)
        tree = reconstruct_tree(path)
        for v in range(tree.n_vertices):
            if tree.is_complete(v):
                assert tree.visit_counts[v] == tree.degree(v)


def test_excursion_statistic_exhaustive():
    for n in range(1, 13):
        counts = {}
        for code in range(2 ** n):
            fwd = [1 if (code >> b) & 1 else -1 for b in range(n)]
            m = excursion_statistic(contour_from_increments(fwd), n)
            counts[m] = counts.get(m, 0) + 1
        for m in range(n + 1):
            assert counts.get(m, 0) / 2 ** n == pytest.approx(excursion_pmf(n, m), abs=1e-12)


def test_certified_past_reaches_required_level():
    for seed in range(30):
        path = gen_contour_certified(200, 5, seed)
        fmin = int(path.values[path.offset + 1:].min())
        assert path.values[: path.offset + 1].min() == fmin - 6
        assert path.ceiling == max(0, int(path.values[path.offset:].max())) + 5


def test_certified_past_respects_cap():
    with pytest.raises(CertificationError) as info:
        gen_contour_certified(10, 40, 1, max_back=5)
    assert info.value.extra_len > 0


def test_collapsed_past_is_reflected():
    path = gen_contour(5000, 0, 2, ceiling=3)
    assert path.values.max() <= 4
