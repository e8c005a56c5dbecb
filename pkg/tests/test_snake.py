import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from brwrange.contour import WindowError
from brwrange.snake import (
    PHANTOM,
    e1,
    gen_snake,
    gen_snake_certified,
    position_key,
    shift_origin,
    snake_from_steps,
    step_keys,
    unit_vectors,
)
from brwrange.streams import replica_seed

steps = st.lists(st.sampled_from([1, -1]), max_size=40)


def test_trivial_snake():
    s = gen_snake(3, 0, 0, 1)
    assert s.pos_index.tolist() == [[0, 0, 0]]


def check_invariants(s):
    path, tree = s.path, s.tree
    assert np.all(s.position(0) == 0)
    # a vertex has one position; consecutive indices are lattice neighbours
    assert np.array_equal(s.pos_index, s.pos_vertex[tree.vertex_of])
    assert np.all(np.abs(np.diff(s.pos_index, axis=0)).sum(axis=1) == 1)
    # edge displacements add up along parent links
    has_parent = tree.parent >= 0
    child = np.nonzero(has_parent)[0]
    diff = s.pos_vertex[child] - s.pos_vertex[tree.parent[child]]
    assert np.array_equal(diff, unit_vectors(s.edge_disp[child], s.dim))
    # down steps return to the parent
    down = np.nonzero(np.diff(path.values) == -1)[0]
    for p in down:
        v = tree.vertex_of[p]
        if tree.parent[v] >= 0:
            assert np.array_equal(s.pos_index[p + 1], s.pos_vertex[tree.parent[v]])
    # hashed keys are linear in the position
    assert np.array_equal(s.keys, position_key(s.pos_vertex, s.dim))


def test_invariants_on_random_windows():
    for seed in range(30):
        check_invariants(gen_snake(1 + seed % 6, 250, 250, seed))
    for seed in range(10):
        check_invariants(gen_snake_certified(4, 300, 6, seed))


@given(steps, steps, st.integers(1, 4), st.data())
def test_invariants_on_explicit_steps(fwd, bwd, dim, data):
    codes = st.lists(st.integers(0, 2 * dim - 1), max_size=40)
    s = snake_from_steps(dim, fwd, bwd, data.draw(codes), data.draw(codes), data.draw(codes))
    check_invariants(s)


def test_position_is_sum_along_tree_path():
    s = gen_snake(3, 200, 300, 4)
    tree = s.tree
    for v in range(0, tree.n_vertices, 7):
        total = np.zeros(3, dtype=np.int64)
        a = v
        while tree.parent[a] >= 0:
            total += unit_vectors(s.edge_disp[a:a + 1], 3)[0]
            a = tree.parent[a]
        # ``a`` is the lowest vertex of the window
        assert np.array_equal(total, s.pos_vertex[v] - s.pos_vertex[a])


def test_revisits_share_positions():
    s = gen_snake(5, 400, 400, 8)
    for v in range(s.tree.n_vertices):
        rows = s.pos_index[s.tree.vertex_of == v]
        assert (rows == rows[0]).all()


def test_determinism():
    a = gen_snake(7, 100, 300, replica_seed(3, 9))
    b = gen_snake(7, 100, 300, replica_seed(3, 9))
    assert np.array_equal(a.pos_index, b.pos_index) and np.array_equal(a.keys, b.keys)


def test_up_steps_uniform_and_independent_of_past_d1():
    ups, prev = [], []
    for seed in range(250):
        s = gen_snake(1, 0, 8000, replica_seed(21, seed))
        dc = np.diff(s.path.values)
        dv = np.diff(s.pos_index[:, 0])
        idx = np.nonzero(dc[1:] == 1)[0] + 1
        ups.append(dv[idx])
        prev.append(dv[idx - 1])
    ups = np.concatenate(ups)
    prev = np.concatenate(prev)
    assert ups.size > 900_000
    se = 0.5 / np.sqrt(ups.size)
    assert abs(np.mean(ups == 1) - 0.5) <= 4 * se
    for sign in (1, -1):
        sub = ups[prev == sign]
        assert abs(np.mean(sub == 1) - 0.5) <= 4 * 0.5 / np.sqrt(sub.size)


def test_shift_origin_identity_and_inverse():
    s = gen_snake(4, 60, 80, 2)
    same = shift_origin(s, 0)
    assert np.array_equal(same.pos_index, s.pos_index)
    assert np.array_equal(same.path.values, s.path.values)
    moved = shift_origin(s, 17)
    assert np.all(moved.position(0) == 0)
    back = shift_origin(moved, -17)
    assert np.array_equal(back.path.values, s.path.values)
    assert np.array_equal(back.pos_index, s.pos_index)
    assert np.array_equal(back.keys, s.keys)


def test_shift_origin_out_of_window():
    with pytest.raises(WindowError):
        shift_origin(gen_snake(2, 3, 3, 0), 4)


def test_shifted_first_step_law():
    d = 3
    rng = np.random.default_rng(5)
    base, shifted = [], []
    for seed in range(4000):
        s = gen_snake(d, 50, 50, replica_seed(33, seed))
        base.append(s.delta_v(1))
        t = shift_origin(s, int(rng.integers(-40, 40)))
        shifted.append(t.delta_v(1))

    def codes(rows):
        rows = np.array(rows)
        axis = np.argmax(np.abs(rows), axis=1)
        return 2 * axis + (rows[np.arange(len(rows)), axis] < 0)

    table = np.array([np.bincount(codes(base), minlength=2 * d),
                      np.bincount(codes(shifted), minlength=2 * d)])
    assert stats.chi2_contingency(table)[1] > 1e-3


def test_toward_root_and_phantom():
    s = snake_from_steps(2, fwd=(1, -1), bwd=(-1, 1))
    tree = s.tree
    root = tree.root
    assert s.toward_root(root) == PHANTOM
    assert np.array_equal(s.vertex_position(PHANTOM), e1(2))
    assert s.toward_root(tree.vertex(1)) == root
    assert s.toward_root(tree.spine[1]) == root


def test_step_keys_are_antisymmetric():
    k = step_keys(5)
    assert np.all(k[0::2] + k[1::2] == 0)
    assert len(set(k.tolist())) == 10
