"""Branching random walk carried by a contour window (the discrete snake)."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .contour import (
    ContourPath,
    TreeIndex,
    gen_contour,
    gen_contour_certified,
    reconstruct_tree,
)
from .streams import ReplicaStreams, as_streams

PHANTOM = -2

_KEY_SEED = 0x5EED_B4A3_C0DE


def step_keys(dim: int) -> np.ndarray:
    """Hash increment of each unit step code (``2a`` is ``+e_a``, ``2a+1`` is ``-e_a``).

    Keys are linear in the position, so a vertex key is its parent's key
    plus the key of the edge step.
    """
    r = np.random.SeedSequence(_KEY_SEED).generate_state(dim, dtype=np.uint64) | np.uint64(1)
    out = np.empty(2 * dim, dtype=np.uint64)
    out[0::2] = r
    out[1::2] = np.uint64(0) - r
    return out


def position_key(point, dim: int | None = None) -> np.uint64:
    point = np.asarray(point, dtype=np.int64)
    dim = point.shape[-1] if dim is None else dim
    r = step_keys(dim)[0::2]
    with np.errstate(over="ignore"):
        return (point.astype(np.uint64) * r).sum(axis=-1, dtype=np.uint64)


def unit_vectors(codes, dim: int) -> np.ndarray:
    """Unit vectors of step codes; code -1 maps to the zero vector."""
    codes = np.asarray(codes, dtype=np.int64)
    out = np.zeros(codes.shape + (dim,), dtype=np.int32)
    ok = codes >= 0
    idx = np.nonzero(ok)
    out[idx + (codes[ok] >> 1,)] = np.where(codes[ok] & 1, -1, 1)
    return out


def e1(dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.int32)
    v[0] = 1
    return v


@dataclass(frozen=True, eq=False)
class SnakeTrajectory:
    """Contour window, its tree and a lattice position for every vertex.

    ``edge_disp[v]`` is the step code of the edge from the parent of ``v``
    to ``v`` (-1 when the parent is outside the window).
    """

    path: ContourPath
    tree: TreeIndex
    dim: int
    edge_disp: np.ndarray
    pos_vertex: np.ndarray
    keys: np.ndarray
    phantom_pos: np.ndarray

    @property
    def back_len(self) -> int:
        return self.path.back_len

    @property
    def fwd_len(self) -> int:
        return self.path.fwd_len

    @cached_property
    def pos_index(self) -> np.ndarray:
        """``V(i)`` for every window index, rows in array-position order."""
        return self.pos_vertex[self.tree.vertex_of]

    @cached_property
    def key_index(self) -> np.ndarray:
        return self.keys[self.tree.vertex_of]

    def position(self, i: int) -> np.ndarray:
        return self.pos_vertex[self.tree.vertex(i)]

    def positions(self, lo: int, hi: int) -> np.ndarray:
        """Rows ``V(lo), ..., V(hi)``."""
        return self.pos_index[self.path.pos(lo): self.path.pos(hi) + 1]

    def delta_v(self, i: int) -> np.ndarray:
        return self.position(i) - self.position(i - 1)

    def toward_root(self, v: int) -> int:
        """Neighbour of ``v`` on the way to the phantom vertex.

        The parent for vertices off the spine, ``∅_{k-1}`` for ``∅_k`` and
        :data:`PHANTOM` for ``∅``.
        """
        lev = int(self.tree.spine_level[v])
        if lev < 0:
            return int(self.tree.parent[v])
        if lev == 0:
            return PHANTOM
        return int(self.tree.spine[lev - 1])

    def vertex_position(self, v: int) -> np.ndarray:
        if v == PHANTOM:
            return self.phantom_pos
        return self.pos_vertex[v]


def _assemble(path: ContourPath, dim: int, fwd_codes, bwd_codes, spine_codes,
              phantom=None) -> SnakeTrajectory:
    if dim < 1:
        raise ValueError("dimension must be at least 1")
    tree = reconstruct_tree(path)
    pos, keys, disp, ok = _kernels.place_vertices(
        path.values, np.int64(path.offset), tree.vertex_of, tree.spine,
        np.ascontiguousarray(fwd_codes, dtype=np.int64),
        np.ascontiguousarray(bwd_codes, dtype=np.int64),
        np.ascontiguousarray(spine_codes, dtype=np.int64),
        dim, step_keys(dim))
    if not ok:
        raise RuntimeError("vertex left without a position; contour window is inconsistent")
    phantom = e1(dim) if phantom is None else np.asarray(phantom, dtype=np.int32)
    for arr in (pos, keys, disp, phantom):
        arr.setflags(write=False)
    return SnakeTrajectory(path, tree, dim, disp, pos, keys, phantom)


def attach_walk(path: ContourPath, dim: int, rng, phantom=None) -> SnakeTrajectory:
    """Carry a random walk on the tree of ``path`` using the displacement streams."""
    streams = as_streams(rng)
    n_spine = -int(path.values.min())
    two_d = 2 * dim
    return _assemble(path, dim,
                     streams.disp_fwd.codes(path.fwd_len, two_d),
                     streams.disp_bwd.codes(path.back_len, two_d),
                     streams.disp_spine.codes(n_spine, two_d),
                     phantom)


def snake_from_steps(dim: int, fwd=(), bwd=(), fwd_codes=None, bwd_codes=None,
                     spine_codes=None, phantom=None) -> SnakeTrajectory:
    """Deterministic trajectory from explicit contour steps and step codes.

    Codes are consumed in discovery order exactly as in :func:`gen_snake`;
    missing codes default to ``+e_1`` (code 0).
    """
    from .contour import contour_from_increments

    path = contour_from_increments(fwd, bwd)

    def pad(codes, n):
        codes = [] if codes is None else list(codes)
        return np.asarray(codes + [0] * max(n - len(codes), 0), dtype=np.int64)

    return _assemble(path, dim, pad(fwd_codes, path.fwd_len), pad(bwd_codes, path.back_len),
                     pad(spine_codes, -int(path.values.min())), phantom)


def gen_snake(dim: int, back_len: int, fwd_len: int, rng, *,
              ceiling: int | None = None, phantom=None) -> SnakeTrajectory:
    """Random snake on ``[-back_len, fwd_len]``: contour first, then displacements."""
    streams = as_streams(rng)
    path = gen_contour(back_len, fwd_len, streams, ceiling=ceiling)
    return attach_walk(path, dim, streams, phantom)


def gen_snake_certified(dim: int, fwd_len: int, radius: int, rng, *, lo: int = 1,
                        max_back: int | None = None, phantom=None) -> SnakeTrajectory:
    """Snake whose past holds every vertex within ``radius`` of ``u_lo..u_n``."""
    streams = as_streams(rng)
    path = gen_contour_certified(fwd_len, radius, streams, lo=lo, max_back=max_back)
    return attach_walk(path, dim, streams, phantom)


def shift_origin(traj: SnakeTrajectory, i: int) -> SnakeTrajectory:
    """Re-index so that ``i`` becomes 0 and translate positions by ``-V(i)``."""
    path = traj.path.shifted(i)
    tree = reconstruct_tree(path)
    v0 = traj.position(i)
    pos = traj.pos_vertex - v0
    with np.errstate(over="ignore"):
        keys = traj.keys - position_key(v0, traj.dim)
    for arr in (pos, keys):
        arr.setflags(write=False)
    return SnakeTrajectory(path, tree, traj.dim, traj.edge_disp, pos, keys, traj.phantom_pos)


__all__ = [
    "PHANTOM",
    "ReplicaStreams",
    "SnakeTrajectory",
    "attach_walk",
    "e1",
    "gen_snake",
    "gen_snake_certified",
    "position_key",
    "shift_origin",
    "snake_from_steps",
    "step_keys",
    "unit_vectors",
]
