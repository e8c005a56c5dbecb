"""Bad points, the pruned snake and its gap counts.

A phantom vertex hangs off the root ``∅`` at ``e_1``.  Writing ``←v`` for
the neighbour of ``v`` towards the phantom, a vertex ``v`` of the forward
half-tree is *bad* when it is a leaf at odd distance from ``∅`` with
``V(v) = V(←←v)``.  For a forward odd index ``2i-1`` this is equivalent to
``ΔC(2i-1) = 1``, ``ΔC(2i) = -1`` and the up-step of ``u_{2i-1}`` being the
step from ``u_{2i-2}`` to ``←u_{2i-2}``, an event of probability ``1/(8d)``
independent of the past.

Deleting each bad ``u_{2i-1}`` together with the return ``u_{2i}`` leaves the
contour of another tree, the pruned snake.  ``X_m`` counts the bad points
deleted between kept indices ``2m`` and ``2m+1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .contour import CertificationError, ContourPath, WindowError, tree_distance
from .ranges import first_occurrence_flags, position_ids
from .snake import PHANTOM, SnakeTrajectory


def _check_odd(traj: SnakeTrajectory, idx: int) -> None:
    if idx < 1 or idx % 2 == 0:
        raise ValueError(f"bad points live at odd forward indices, got {idx}")
    if idx + 1 > traj.fwd_len:
        raise WindowError(f"index {idx + 1} outside forward window of length {traj.fwd_len}")


def is_bad(traj: SnakeTrajectory, idx: int) -> bool:
    """Tree-side test of badness for ``u_idx`` (``idx`` odd, forward)."""
    _check_odd(traj, idx)
    tree = traj.tree
    v = tree.vertex(idx)
    if tree.first_index_of(v) <= 0 or tree.spine_level[v] >= 0:
        return False
    if tree_distance(traj.path, 0, idx) % 2 == 0:
        return False
    if len(tree.children(v)) or not tree.is_complete(v):
        return False
    up = traj.toward_root(v)
    up2 = traj.toward_root(up)
    return bool(np.array_equal(traj.pos_vertex[v], traj.vertex_position(up2)))


def _return_targets(traj: SnakeTrajectory, idx: np.ndarray) -> np.ndarray:
    """Positions of ``←u_j`` for forward indices ``j``."""
    path, tree = traj.path, traj.tree
    off = path.offset
    fwd = path.values[off:]
    run_min = np.minimum.accumulate(fwd)
    c = fwd[idx]
    on_spine = c == run_min[idx]
    out = np.empty((idx.shape[0], traj.dim), dtype=np.int32)
    verts = tree.vertex_of[idx + off]
    par = tree.parent[verts]
    off_spine = ~on_spine
    out[off_spine] = traj.pos_vertex[par[off_spine]]
    lev = -c[on_spine]
    spine_pos = np.where((lev > 0)[:, None],
                         traj.pos_vertex[tree.spine[np.maximum(lev - 1, 0)]],
                         traj.phantom_pos[None, :])
    out[on_spine] = spine_pos
    return out


def bad_flags(traj: SnakeTrajectory, pairs: int | None = None) -> np.ndarray:
    """Badness of ``u_{2i-1}`` for ``i = 1..pairs`` from increments alone."""
    if pairs is None:
        pairs = traj.fwd_len // 2
    if 2 * pairs > traj.fwd_len:
        raise WindowError("not enough forward steps for the requested pairs")
    if pairs == 0:
        return np.zeros(0, dtype=bool)
    off = traj.path.offset
    vals = traj.path.values
    odd = 2 * np.arange(1, pairs + 1) - 1
    up = vals[off + odd] - vals[off + odd - 1] == 1
    down = vals[off + odd + 1] - vals[off + odd] == -1
    pos = traj.pos_index
    same = np.all(pos[off + odd] == _return_targets(traj, odd - 1), axis=1)
    return up & down & same


def is_bad_increment(traj: SnakeTrajectory, idx: int) -> bool:
    """Increment-side test of badness, one index."""
    _check_odd(traj, idx)
    return bool(bad_flags(traj, (idx + 1) // 2)[-1])


@dataclass(frozen=True, eq=False)
class PrunedSnake:
    """Forward part of a snake with its bad pairs deleted.

    ``kept[p]`` is the base index of ``û_p`` for ``p = 0..horizon`` and
    ``gaps[m] = X_m`` for ``m = 0..horizon // 2``.
    """

    base: SnakeTrajectory
    horizon: int
    kept: np.ndarray
    gaps: np.ndarray
    deleted: np.ndarray

    @cached_property
    def gap_sums(self) -> np.ndarray:
        """``N`` in pair units: ``X_0 + ... + X_m``."""
        return np.cumsum(self.gaps)

    def n_bad(self, n: int) -> int:
        """Bad points deleted up to kept step ``n``: ``X_0 + ... + X_{n // 2}``."""
        if n < 0 or n > self.horizon:
            raise WindowError(f"n={n} outside pruned horizon {self.horizon}")
        return int(self.gap_sums[n // 2])

    @cached_property
    def bad_counts(self) -> np.ndarray:
        """``n_bad(n)`` for ``n = 0..horizon``."""
        return self.gap_sums[np.arange(self.horizon + 1) // 2]

    @cached_property
    def values(self) -> np.ndarray:
        """Pruned contour ``Ĉ_0..Ĉ_horizon``."""
        return self.base.path.values[self.base.path.offset + self.kept]

    @cached_property
    def positions(self) -> np.ndarray:
        return self.base.pos_index[self.base.path.offset + self.kept]

    def contour(self) -> ContourPath:
        """Base past followed by the pruned forward contour."""
        path = self.base.path
        return ContourPath(np.concatenate((path.values[: path.offset], self.values)),
                           path.back_len, path.ceiling)


def prune(traj: SnakeTrajectory, horizon: int) -> PrunedSnake:
    """Delete bad pairs until ``horizon`` kept steps and their gaps are known."""
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    pairs = traj.fwd_len // 2
    bad = bad_flags(traj, pairs)
    good = np.nonzero(~bad)[0]
    need = horizon // 2 + 1
    if good.shape[0] < need:
        missing = need - good.shape[0]
        raise CertificationError(
            f"forward window of length {traj.fwd_len} closes only {good.shape[0]} of "
            f"{need} kept pairs", extra_len=2 * missing)
    good = good[:need]
    # pair index i (0-based) covers base indices 2i+1, 2i+2
    kept = np.empty(2 * need + 1, dtype=np.int64)
    kept[0] = 0
    kept[1::2] = 2 * good + 1
    kept[2::2] = 2 * good + 2
    kept = kept[: horizon + 1]
    bounds = np.concatenate(([-1], good))
    gaps = np.diff(bounds) - 1
    deleted = 2 * np.nonzero(bad[: good[-1]])[0] + 1
    for arr in (kept, gaps, deleted):
        arr.setflags(write=False)
    return PrunedSnake(traj, horizon, kept, gaps, deleted)


def _count_new(points: np.ndarray, excluded: np.ndarray) -> np.ndarray:
    pts = np.vstack([excluded, points])
    flags = first_occurrence_flags(position_ids(pts))
    return flags[excluded.shape[0]:]


def _excluded(traj: SnakeTrajectory, past: int) -> np.ndarray:
    if past < 0 or past > traj.back_len:
        raise WindowError(f"past={past} outside backward window of length {traj.back_len}")
    if traj.path.ceiling is not None and past > 0:
        raise ValueError("the past of this trajectory was collapsed above its ceiling")
    return np.vstack([traj.phantom_pos[None, :], traj.positions(-past, 0)])


def y_tilde_all(traj: SnakeTrajectory, n: int, past: int) -> np.ndarray:
    """``#(V[1,m] \\ (V[-past,0] ∪ {phantom}))`` for ``m = 0..n``."""
    if n < 0 or n > traj.fwd_len:
        raise WindowError(f"n={n} outside forward window of length {traj.fwd_len}")
    flags = _count_new(traj.positions(1, n) if n else np.zeros((0, traj.dim), np.int32),
                       _excluded(traj, past))
    return np.concatenate(([0], np.cumsum(flags)))


def y_tilde(traj: SnakeTrajectory, n: int, past: int) -> int:
    return int(y_tilde_all(traj, n, past)[n])


def y_hat_all(pruned: PrunedSnake, n: int, past: int) -> np.ndarray:
    """``#(V̂[1,m] \\ (V[-past,0] ∪ {phantom}))`` for ``m = 0..n``."""
    if n < 0 or n > pruned.horizon:
        raise WindowError(f"n={n} outside pruned horizon {pruned.horizon}")
    flags = _count_new(pruned.positions[1: n + 1], _excluded(pruned.base, past))
    return np.concatenate(([0], np.cumsum(flags)))


def y_hat(pruned: PrunedSnake, n: int, past: int) -> int:
    return int(y_hat_all(pruned, n, past)[n])


def pathwise_violations(traj: SnakeTrajectory, horizon: int, past: int) -> int:
    """Number of ``n <= horizon`` with ``ỹ(n + 2 N_n) != ŷ(n)``."""
    pruned = prune(traj, horizon)
    shifted = np.arange(horizon + 1) + 2 * pruned.bad_counts
    yt = y_tilde_all(traj, int(shifted.max()), past)
    yh = y_hat_all(pruned, horizon, past)
    return int(np.count_nonzero(yt[shifted] != yh))
