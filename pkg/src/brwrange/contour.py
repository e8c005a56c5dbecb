"""Two-sided contour process of the Kesten tree and the tree it encodes.

With geometric(1/2) offspring the depth-first contour ``(C_i)`` is a
two-sided simple random walk.  A finite window ``[-back_len, fwd_len]`` of it
determines the part of the tree explored during that window; two indices
``i <= j`` visit the same vertex iff ``C_i = C_j = min_{i<=l<=j} C_l``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .streams import as_streams


class WindowError(IndexError):
    """An index fell outside the generated window."""


class CertificationError(RuntimeError):
    """The past of a window is too short for the requested computation.

    ``depth_needed`` is how far (in contour levels) the backward walk must
    still descend; it is also a lower bound on the number of extra backward
    steps required.
    """

    def __init__(self, message: str, depth_needed: int = 0, extra_len: int = 0):
        super().__init__(message)
        self.depth_needed = int(depth_needed)
        self.extra_len = int(max(extra_len, depth_needed))


class SparseTable:
    """O(1) range-minimum queries after an O(n log n) build."""

    def __init__(self, values: np.ndarray):
        self.values = np.ascontiguousarray(values, dtype=np.int64)
        self.table = _kernels.sparse_table(self.values)

    def __len__(self) -> int:
        return self.values.shape[0]

    def query(self, lo: int, hi: int) -> int:
        """Minimum over array positions ``lo..hi`` inclusive."""
        if lo > hi:
            lo, hi = hi, lo
        level = (hi - lo + 1).bit_length() - 1
        t = self.table[level]
        return int(min(t[lo], t[hi - (1 << level) + 1]))

    def query_many(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        lo = np.asarray(lo, dtype=np.int64)
        hi = np.asarray(hi, dtype=np.int64)
        lo, hi = np.minimum(lo, hi), np.maximum(lo, hi)
        span = hi - lo + 1
        level = np.floor(np.log2(span)).astype(np.int64)
        # guard against float rounding at exact powers of two
        level -= (1 << level) > span
        level += (1 << (level + 1)) <= span
        return np.minimum(self.table[level, lo], self.table[level, hi - (1 << level) + 1])


@dataclass(frozen=True, eq=False)
class ContourPath:
    """Values ``C_i`` for ``i`` in ``[-back_len, fwd_len]`` with ``C_0 = 0``.

    ``values[i + back_len] = C_i``.  When ``ceiling`` is set the backward
    part had every excursion above that level collapsed to one leaf: all
    vertices at levels ``<= ceiling`` and their visit order are exact, the
    rest of the past is not.
    """

    values: np.ndarray
    back_len: int
    ceiling: int | None = None

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.int64)
        if v.ndim != 1:
            raise ValueError("values must be one-dimensional")
        if self.back_len < 0 or v.shape[0] < self.back_len + 1:
            raise ValueError("values shorter than back_len + 1")
        if v[self.back_len] != 0:
            raise ValueError("C_0 must be 0")
        if v.shape[0] > 1 and not np.all(np.abs(np.diff(v)) == 1):
            raise ValueError("contour increments must be +1 or -1")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def fwd_len(self) -> int:
        return self.values.shape[0] - self.back_len - 1

    @property
    def offset(self) -> int:
        return self.back_len

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.back_len, self.fwd_len + 1)

    @property
    def increments(self) -> np.ndarray:
        """``ΔC(i) = C_i - C_{i-1}`` for ``i`` in ``(-back_len, fwd_len]``."""
        return np.diff(self.values)

    def in_window(self, i: int) -> bool:
        return -self.back_len <= i <= self.fwd_len

    def pos(self, i: int) -> int:
        """Array position of contour index ``i``."""
        if not self.in_window(i):
            raise WindowError(f"index {i} outside window [{-self.back_len}, {self.fwd_len}]")
        return i + self.back_len

    def value(self, i: int) -> int:
        return int(self.values[self.pos(i)])

    def delta(self, i: int) -> int:
        """``ΔC(i)``; needs ``i - 1`` in the window too."""
        return self.value(i) - self.value(i - 1)

    @cached_property
    def rmq(self) -> SparseTable:
        return SparseTable(self.values)

    def range_min(self, i: int, j: int) -> int:
        """``min_{i<=l<=j} C_l``."""
        return self.rmq.query(self.pos(i), self.pos(j))

    def forward_min(self, lo: int = 1, hi: int | None = None) -> int:
        hi = self.fwd_len if hi is None else hi
        if hi < lo:
            return 0
        return int(self.values[self.pos(lo): self.pos(hi) + 1].min())

    def shifted(self, i: int) -> "ContourPath":
        """Same window re-indexed so that index ``i`` becomes 0."""
        p = self.pos(i)
        c = int(self.values[p])
        ceiling = None if self.ceiling is None else self.ceiling - c
        return ContourPath(self.values - c, p, ceiling)


def contour_from_increments(fwd=(), bwd=(), ceiling: int | None = None) -> ContourPath:
    """Build a window from explicit steps.

    ``fwd`` lists ``ΔC(1), ..., ΔC(n)``; ``bwd`` lists the steps of the
    reversed walk, ``C_{-1} - C_0, C_{-2} - C_{-1}, ...``.
    """
    fwd = np.asarray(fwd, dtype=np.int64).reshape(-1)
    bwd = np.asarray(bwd, dtype=np.int64).reshape(-1)
    back = np.concatenate(([0], np.cumsum(bwd)))[::-1]
    front = np.cumsum(fwd)
    return ContourPath(np.concatenate((back, front)), bwd.shape[0], ceiling)


def _forward_walk(streams, fwd_len: int) -> np.ndarray:
    bits = streams.contour_fwd.bits(fwd_len).astype(np.int64)
    return np.cumsum(2 * bits - 1)


def _backward_walk(streams, *, fixed_len: int = -1, target: int = 0,
                   ceiling: int | None = None, max_len: int = 0) -> np.ndarray:
    ceil = _kernels.NO_CEILING if ceiling is None else np.int64(ceiling)
    if fixed_len >= 0 and ceiling is None:
        bits = streams.contour_bwd.bits(fixed_len).astype(np.int64)
        return np.concatenate(([0], np.cumsum(2 * bits - 1)))
    n_bits = max(1024, 2 * fixed_len if fixed_len >= 0 else 4 * (target + 1) ** 2)
    while True:
        bits = streams.contour_bwd.bits(n_bits)
        walk, _, status = _kernels.walk_backward(bits, ceil, np.int64(target),
                                                 np.int64(fixed_len), np.int64(max_len))
        if status == _kernels.DONE:
            return walk
        if status == _kernels.CAPPED:
            raise CertificationError(
                f"backward walk did not reach level {-target} within {max_len} steps",
                depth_needed=target + int(walk.min()) if walk.size else target,
                extra_len=max_len)
        n_bits *= 2


def gen_contour(back_len: int, fwd_len: int, rng, *, ceiling: int | None = None) -> ContourPath:
    """Random contour window with ``back_len`` past and ``fwd_len`` future steps.

    ``rng`` is a seed, a :class:`ReplicaStreams` or a numpy Generator.
    Forward and backward steps come from independent streams, so the forward
    part does not depend on ``back_len``.
    """
    if back_len < 0 or fwd_len < 0:
        raise ValueError("window lengths must be non-negative")
    streams = as_streams(rng)
    front = _forward_walk(streams, fwd_len)
    back = _backward_walk(streams, fixed_len=back_len, ceiling=ceiling)
    return ContourPath(np.concatenate((back[::-1], front)), back_len, ceiling)


def required_depth(front_min: int, radius: int) -> int:
    """Level the past must reach so that radius-``radius`` balls around
    indices whose contour stays ``>= front_min`` lie inside the window."""
    return radius + 1 - front_min


def gen_contour_certified(fwd_len: int, radius: int, rng, *, lo: int = 1,
                          max_back: int | None = None) -> ContourPath:
    """Forward window plus just enough past for radius-``radius`` balls.

    The past is generated until the backward walk first reaches
    ``min_{lo<=i<=n} C_i - radius - 1``; excursions above
    ``max_{0<=i<=n} C_i + radius`` are collapsed since no vertex there can be
    within ``radius`` of a forward index.
    """
    if fwd_len < 0 or radius < 0:
        raise ValueError("fwd_len and radius must be non-negative")
    streams = as_streams(rng)
    front = _forward_walk(streams, fwd_len)
    seg = np.concatenate(([0], front))[max(lo, 0):]
    fmin = int(seg.min()) if seg.size else 0
    target = required_depth(fmin, radius)
    ceiling = int(max(front.max(initial=0), 0)) + radius
    if max_back is None:
        max_back = default_back_cap(fwd_len, radius)
    back = _backward_walk(streams, target=target, ceiling=ceiling, max_len=max_back)
    return ContourPath(np.concatenate((back[::-1], front)), back.shape[0] - 1, ceiling)


def default_back_cap(fwd_len: int, radius: int) -> int:
    return 64 * max(fwd_len, (radius + 1) ** 2, 64)


def tree_distance(path: ContourPath, i: int, j: int) -> int:
    """Graph distance between ``u_i`` and ``u_j``."""
    if i > j:
        i, j = j, i
    return path.value(i) + path.value(j) - 2 * path.range_min(i, j)


def tree_distances(path: ContourPath, i, j) -> np.ndarray:
    """Vectorised :func:`tree_distance` over index arrays."""
    pi = np.asarray(i, dtype=np.int64) + path.back_len
    pj = np.asarray(j, dtype=np.int64) + path.back_len
    n = len(path)
    if np.any((pi < 0) | (pi >= n) | (pj < 0) | (pj >= n)):
        raise WindowError("index outside window")
    v = path.values
    return v[pi] + v[pj] - 2 * path.rmq.query_many(pi, pj)


def excursion_statistic(path: ContourPath, n: int) -> int:
    """``C_n - 2 min_{0<=i<=n} C_i``."""
    if n < 0:
        raise WindowError("n must be non-negative")
    return path.value(n) - 2 * path.range_min(0, n)


@dataclass(frozen=True, eq=False)
class TreeIndex:
    """The part of the Kesten tree explored by a contour window.

    Arrays indexed by vertex id: ``parent`` (-1 for the lowest vertex, whose
    parent lies outside the window), ``first_pos`` (array position of the
    first visit), ``depth`` (contour level).  ``vertex_of`` is indexed by
    array position.  ``spine[k]`` is the vertex id of ``∅_k``.
    """

    path: ContourPath
    vertex_of: np.ndarray
    parent: np.ndarray
    first_pos: np.ndarray
    depth: np.ndarray
    spine: np.ndarray

    SENTINEL = -1

    @property
    def n_vertices(self) -> int:
        return self.parent.shape[0]

    @property
    def root(self) -> int:
        return int(self.spine[0])

    def vertex(self, i: int) -> int:
        return int(self.vertex_of[self.path.pos(i)])

    def first_index_of(self, v: int) -> int:
        return int(self.first_pos[v]) - self.path.back_len

    @cached_property
    def _children(self) -> tuple[np.ndarray, np.ndarray]:
        kids = np.nonzero(self.parent >= 0)[0]
        child_ids = kids[np.argsort(self.parent[kids], kind="stable")]
        counts = np.bincount(self.parent[kids], minlength=self.n_vertices)
        return np.concatenate(([0], np.cumsum(counts))), child_ids

    def children(self, v: int) -> np.ndarray:
        ptr, ids = self._children
        return ids[ptr[v]: ptr[v + 1]]

    def neighbors(self, v: int) -> list[int]:
        out = [int(c) for c in self.children(v)]
        if self.parent[v] >= 0:
            out.append(int(self.parent[v]))
        return out

    @cached_property
    def spine_level(self) -> np.ndarray:
        """``k`` for ``∅_k``, -1 for vertices off the spine."""
        lev = np.full(self.n_vertices, -1, dtype=np.int64)
        lev[self.spine] = np.arange(self.spine.shape[0])
        return lev

    @cached_property
    def visit_counts(self) -> np.ndarray:
        return np.bincount(self.vertex_of, minlength=self.n_vertices)

    @cached_property
    def _visits(self) -> tuple[np.ndarray, np.ndarray]:
        order = np.argsort(self.vertex_of, kind="stable")
        ptr = np.concatenate(([0], np.cumsum(self.visit_counts)))
        return ptr, order

    def visits(self, v: int) -> np.ndarray:
        """Contour indices visiting ``v``, increasing."""
        ptr, order = self._visits
        return order[ptr[v]: ptr[v + 1]] - self.path.back_len

    @cached_property
    def last_pos(self) -> np.ndarray:
        last = np.empty(self.n_vertices, dtype=np.int64)
        last[self.vertex_of] = np.arange(self.vertex_of.shape[0])
        return last

    def is_complete(self, v: int) -> bool:
        """Whether the window contains the whole visit history of ``v``:
        the step into it from its parent and the step back out."""
        f, l = int(self.first_pos[v]), int(self.last_pos[v])
        vals = self.path.values
        if self.spine_level[v] >= 0 or f == 0 or l == len(vals) - 1:
            return False
        return vals[f - 1] == vals[f] - 1 and vals[l + 1] == vals[l] - 1

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def bfs_distances(self, source: int, radius: int | None = None) -> dict[int, int]:
        """Distances from ``source`` to every vertex within ``radius``."""
        dist = {source: 0}
        queue = deque([source])
        while queue:
            v = queue.popleft()
            dv = dist[v]
            if radius is not None and dv >= radius:
                continue
            for w in self.neighbors(v):
                if w not in dist:
                    dist[w] = dv + 1
                    queue.append(w)
        return dist


def reconstruct_tree(path: ContourPath) -> TreeIndex:
    """Recover vertex identities, parents, children and the spine."""
    vertex_of, parent, first = _kernels.scan_tree(path.values)
    depth = path.values[first]
    spine = [int(vertex_of[path.offset])]
    while parent[spine[-1]] >= 0:
        spine.append(int(parent[spine[-1]]))
    for arr in (vertex_of, parent, first, depth):
        arr.setflags(write=False)
    return TreeIndex(path, vertex_of, parent, first, depth,
                     np.asarray(spine, dtype=np.int64))
