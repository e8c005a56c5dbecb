"""Per-replica random streams.

Every replica owns one root :class:`numpy.random.SeedSequence`.  It is split
by a fixed rule into a contour stream and a displacement stream, and each of
those is split again by direction of exploration (forward, backward, spine).
Draws are always taken from a freshly constructed bit generator, so asking
for ``count + m`` values returns the first ``count`` values unchanged.  This
prefix property is what lets a caller lengthen the past of a trajectory
without touching anything already generated.
"""
from __future__ import annotations

import numpy as np

from . import _kernels

CONTOUR, DISPLACEMENT = 0, 1
FORWARD, BACKWARD, SPINE = 0, 1, 2



def uniform_codes(raw: np.ndarray, modulus: int) -> np.ndarray:
    """Map raw 64-bit words to ``floor(raw * modulus / 2**64)``.

    Multiply-high without rejection; the deviation from uniformity is at
    most ``modulus / 2**64`` per value.  Exact for ``modulus < 2**32``.
    """
    if not 0 < modulus < 2**32:
        raise ValueError("modulus must lie in [1, 2**32)")
    return _kernels.uniform_codes(np.ascontiguousarray(raw, dtype=np.uint64), modulus)


class SubStream:
    """One deterministic source of bits and bounded integers."""

    __slots__ = ("seed_seq",)

    def __init__(self, seed_seq: np.random.SeedSequence):
        self.seed_seq = seed_seq

    def raw(self, count: int) -> np.ndarray:
        if count <= 0:
            return np.zeros(0, dtype=np.uint64)
        return np.random.PCG64(self.seed_seq).random_raw(count)

    def bits(self, count: int) -> np.ndarray:
        """First ``count`` fair bits of the stream as uint8 in {0, 1}."""
        words = self.raw((count + 63) // 64)
        return np.unpackbits(words.view(np.uint8), bitorder="little")[:count]

    def codes(self, count: int, modulus: int) -> np.ndarray:
        """First ``count`` integers uniform on ``[0, modulus)``."""
        return uniform_codes(self.raw(count), modulus)


class ReplicaStreams:
    """The five sub-streams that drive one trajectory."""

    def __init__(self, seed: int | np.random.SeedSequence):
        if isinstance(seed, np.random.SeedSequence):
            root = seed
        else:
            root = np.random.SeedSequence(int(seed))
        self.root = root
        self.contour_fwd = SubStream(self._child(CONTOUR, FORWARD))
        self.contour_bwd = SubStream(self._child(CONTOUR, BACKWARD))
        self.disp_fwd = SubStream(self._child(DISPLACEMENT, FORWARD))
        self.disp_bwd = SubStream(self._child(DISPLACEMENT, BACKWARD))
        self.disp_spine = SubStream(self._child(DISPLACEMENT, SPINE))

    def _child(self, *key: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(
            self.root.entropy,
            spawn_key=tuple(self.root.spawn_key) + key,
            pool_size=self.root.pool_size,
        )

    def __repr__(self) -> str:
        return f"ReplicaStreams(entropy={self.root.entropy}, spawn_key={self.root.spawn_key})"


def replica_seed(seed_base: int, index: int) -> np.random.SeedSequence:
    """Seed of replica ``index`` in a run seeded with ``seed_base``."""
    return np.random.SeedSequence(int(seed_base), spawn_key=(int(index),))


def as_streams(rng) -> ReplicaStreams:
    """Coerce an int seed, SeedSequence, Generator or ReplicaStreams."""
    if isinstance(rng, ReplicaStreams):
        return rng
    if isinstance(rng, np.random.Generator):
        return ReplicaStreams(int(rng.integers(0, 2**63)))
    return ReplicaStreams(rng)
