"""Range statistics of the snake: ``R_n``, windowed ``Y_n`` and truncated ξ.

``ξ_i^k`` is 1 when ``V(i)`` differs from the position of every earlier
index within tree distance ``k`` of ``u_i``.  Earlier indices outside the
window can be ignored once the past has descended far enough; see
:func:`certify`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .contour import CertificationError, WindowError
from .snake import SnakeTrajectory, step_keys
from .streams import as_streams


class RangeLedger:
    """Hashed set of lattice points with a running count.

    Points are packed into one Python integer when every coordinate fits in
    a signed ``128 // d``-bit field, otherwise their raw bytes are used.
    """

    __slots__ = ("dim", "bits", "_limit", "seen", "count")

    def __init__(self, dim: int):
        self.dim = dim
        self.bits = max(128 // dim, 1)
        self._limit = (1 << (self.bits - 1)) - 1
        self.seen: set = set()
        self.count = 0

    def _key(self, point):
        point = np.asarray(point, dtype=np.int64)
        if np.all(np.abs(point) < self._limit):
            key = 0
            for c in point.tolist():
                key = (key << self.bits) | (c + self._limit)
            return key
        return point.tobytes()

    def add(self, point) -> bool:
        """Insert ``point``; True when it was new."""
        key = self._key(point)
        if key in self.seen:
            return False
        self.seen.add(key)
        self.count += 1
        return True

    def update(self, points) -> int:
        return sum(self.add(p) for p in points)

    def __contains__(self, point) -> bool:
        return self._key(point) in self.seen

    def __len__(self) -> int:
        return self.count


@dataclass(frozen=True)
class XiVector:
    k: int
    values: np.ndarray
    window_certified: bool

    def __len__(self) -> int:
        return self.values.shape[0]

    def total(self) -> int:
        return int(self.values.sum())


def _check_forward(traj: SnakeTrajectory, n: int) -> None:
    if n < 0 or n > traj.fwd_len:
        raise WindowError(f"n={n} outside forward window of length {traj.fwd_len}")


def _check_exact_past(traj: SnakeTrajectory, past: int) -> None:
    if past < 0 or past > traj.back_len:
        raise WindowError(f"past={past} outside backward window of length {traj.back_len}")
    if traj.path.ceiling is not None and past > 0:
        raise ValueError("the past of this trajectory was collapsed above its ceiling; "
                         "positions of the whole past are not available")


def range_size(traj: SnakeTrajectory, n: int) -> int:
    """``R_n = #{V(1), ..., V(n)}``."""
    _check_forward(traj, n)
    ledger = RangeLedger(traj.dim)
    if n:
        ledger.update(traj.positions(1, n))
    return ledger.count


def y_windowed(traj: SnakeTrajectory, n: int, past: int) -> int:
    """``#(V[1,n] \\ V[-past, 0])``."""
    _check_forward(traj, n)
    _check_exact_past(traj, past)
    if n == 0:
        return 0
    ledger = RangeLedger(traj.dim)
    ledger.update(traj.positions(-past, 0))
    before = ledger.count
    ledger.update(traj.positions(1, n))
    return ledger.count - before


def position_ids(points: np.ndarray) -> np.ndarray:
    """Dense integer label per row, equal rows sharing a label."""
    points = np.ascontiguousarray(points)
    if points.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    rows = points.view(np.dtype((np.void, points.dtype.itemsize * points.shape[1]))).ravel()
    _, inverse = np.unique(rows, return_inverse=True)
    return inverse.reshape(-1)


def first_occurrence_flags(ids: np.ndarray) -> np.ndarray:
    """1 where a label appears for the first time in the sequence."""
    flags = np.zeros(ids.shape[0], dtype=np.int8)
    if ids.shape[0]:
        _, first = np.unique(ids, return_index=True)
        flags[first] = 1
    return flags


def new_point_flags(traj: SnakeTrajectory, n: int, past: int, extra=None) -> np.ndarray:
    """``1{V(i) ∉ V[-past, i) ∪ extra}`` for ``i = 1..n``.

    Partial sums of these flags are ``y_windowed`` for every prefix.
    """
    _check_forward(traj, n)
    _check_exact_past(traj, past)
    pts = traj.positions(-past, n)
    if extra is not None:
        pts = np.vstack([np.asarray(extra, dtype=pts.dtype).reshape(-1, traj.dim), pts])
    flags = first_occurrence_flags(position_ids(pts))
    return flags[-n:] if n else flags[:0]


def y_windowed_all(traj: SnakeTrajectory, n: int, past: int) -> np.ndarray:
    """``y_windowed(traj, m, past)`` for ``m = 0..n``."""
    return np.concatenate(([0], np.cumsum(new_point_flags(traj, n, past))))


def certify(traj: SnakeTrajectory, k: int, lo: int, hi: int) -> None:
    """Raise unless every index within distance ``k`` of ``u_lo..u_hi`` that
    precedes it lies in the window.

    Any index ``j`` before the window satisfies
    ``d(u_j, u_i) >= C_i - min_{j<=l<=i} C_l``, so it suffices that the past
    reaches ``min_{lo<=i<=hi} C_i - k - 1``.  For collapsed pasts the
    ceiling must also clear ``max C_i + k``.
    """
    path = traj.path
    if hi < lo:
        return
    seg = path.values[path.pos(lo): path.pos(hi) + 1]
    need = int(seg.min()) - k - 1
    past_min = int(path.values[: path.offset + 1].min())
    if past_min > need:
        raise CertificationError(
            f"past reaches level {past_min}, radius {k} needs {need}",
            depth_needed=past_min - need)
    if path.ceiling is not None and path.ceiling < int(seg.max()) + k:
        raise CertificationError(
            f"past collapsed above level {path.ceiling}, radius {k} needs {int(seg.max()) + k}")


def _grouping(traj: SnakeTrajectory):
    cache = traj.__dict__.get("_key_groups")
    if cache is None:
        cache = _kernels.group_by_key(traj.keys)
        traj.__dict__["_key_groups"] = cache
    return cache


def collision_distances(traj: SnakeTrajectory, lo: int, hi: int, limit: int,
                        certified_radius: int | None = None) -> np.ndarray:
    """For ``i = lo..hi``: tree distance from ``u_i`` to the nearest vertex
    at the same position visited before ``i`` (0 if ``u_i`` was visited
    before), or ``limit + 1`` if there is none within ``limit``.

    ``xi_i^k = 1{D_i > k}`` for every ``k <= certified_radius``.
    """
    certify(traj, limit if certified_radius is None else certified_radius, lo, hi)
    if hi < lo:
        return np.zeros(0, dtype=np.int64)
    tree = traj.tree
    order, starts, group_of = _grouping(traj)
    return _kernels.collision_distance(
        tree.vertex_of, tree.first_pos, tree.parent, tree.depth, traj.pos_vertex,
        order, starts, group_of, np.int64(traj.path.pos(lo)), np.int64(traj.path.pos(hi)),
        np.int64(limit))


def _xi_bfs(traj: SnakeTrajectory, k: int, n: int) -> np.ndarray:
    tree, path = traj.tree, traj.path
    out = np.zeros(n, dtype=np.int8)
    for i in range(1, n + 1):
        p = path.pos(i)
        v = int(tree.vertex_of[p])
        if tree.first_pos[v] < p:
            continue
        here = traj.pos_vertex[v]
        hit = False
        for w, _ in tree.bfs_distances(v, k).items():
            if w != v and tree.first_pos[w] < p and np.array_equal(traj.pos_vertex[w], here):
                hit = True
                break
        out[i - 1] = 0 if hit else 1
    return out


def xi_k_all(traj: SnakeTrajectory, k: int, n: int, method: str = "bucket") -> XiVector:
    """``ξ_i^k`` for ``i = 1..n``.

    ``method="bucket"`` scans earlier vertices sharing the position of
    ``u_i`` and tests their distance by climbing parents; ``"bfs"`` walks the
    radius-``k`` ball of ``u_i``.  Both give identical values.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    _check_forward(traj, n)
    certify(traj, k, 1, n)
    if n == 0:
        return XiVector(k, np.zeros(0, dtype=np.int8), True)
    if method == "bucket":
        vals = (collision_distances(traj, 1, n, k) > k).astype(np.int8)
    elif method == "bfs":
        vals = _xi_bfs(traj, k, n)
    else:
        raise ValueError(f"unknown method {method!r}")
    return XiVector(k, vals, True)


def ball_count(traj: SnakeTrajectory, i: int, k: int, mode: str = "<=") -> int:
    """Number of indices ``j < i`` with ``d(u_j, u_i) <= k`` (or ``== k``)."""
    if mode not in ("<=", "="):
        raise ValueError("mode must be '<=' or '='")
    certify(traj, k, i, i)
    tree = traj.tree
    v = tree.vertex(i)
    total = 0
    for w, dist in tree.bfs_distances(v, k).items():
        if mode == "=" and dist != k:
            continue
        total += int(np.searchsorted(tree.visits(w), i))
    return total


def default_truncation(dim: int, n: int, tol: float = 0.01, const: float = 1.0) -> int:
    """Smallest k with ``n * const * k**((4-d)/2) < tol``."""
    if dim <= 4:
        raise ValueError("the truncation bias bound needs d >= 5")
    return max(1, math.ceil((n * const / tol) ** (2.0 / (dim - 4))))


def subtree_hits(dim: int, js, rng, max_generation: int = 4096) -> tuple[np.ndarray, bool]:
    """Whether the origin lies in ``V(T_j^-)`` for each spine level ``j``.

    One geometric Galton-Watson tree and one spine walk are drawn per call,
    so the flags for different ``j`` are dependent but each is a sample of
    its own indicator.  The tree is grown up to ``max_generation``; the flag
    ``truncated`` says whether it was still alive there.
    """
    streams = as_streams(rng)
    js = np.asarray(js, dtype=np.int64)
    spine_codes = streams.disp_spine.codes(int(js.max()), 2 * dim)
    keys = step_keys(dim)
    n_draws = 1024
    while True:
        bits = streams.contour_fwd.bits(2 * n_draws)
        codes = streams.disp_fwd.codes(n_draws, 2 * dim)
        hits, nv, truncated = _kernels.gw_subtree_hits(
            spine_codes, bits, codes, keys, dim, js, np.int64(max_generation))
        if nv >= 0:
            return hits, bool(truncated)
        n_draws *= 4
