"""Deterministic replica orchestration."""
from __future__ import annotations

import inspect
import os

import numpy as np
from joblib import Parallel, delayed

from ..contour import CertificationError
from ..streams import ReplicaStreams, replica_seed

WORKERS_ENV = "BRWRANGE_WORKERS"
RETRY_ENLARGE = 4


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _accepts_enlarge(kernel) -> bool:
    try:
        return "enlarge" in inspect.signature(kernel).parameters
    except (TypeError, ValueError):
        return False


def _one(kernel, seed_base: int, index: int, enlarge_ok: bool):
    seed = replica_seed(seed_base, index)
    try:
        if enlarge_ok:
            return kernel(ReplicaStreams(seed), enlarge=1)
        return kernel(ReplicaStreams(seed))
    except CertificationError:
        if not enlarge_ok:
            raise
    # same seed, longer windows: the streams are prefix-stable so only the
    # tail of the trajectory changes
    return kernel(ReplicaStreams(seed), enlarge=RETRY_ENLARGE)


def _chunk(kernel, seed_base: int, lo: int, hi: int, enlarge_ok: bool):
    return [np.asarray(_one(kernel, seed_base, i, enlarge_ok), dtype=float) for i in range(lo, hi)]


def run_replicas(kernel, replicas: int, seed: int, *, workers: int | None = None,
                 chunk: int | None = None) -> np.ndarray:
    """Evaluate ``kernel`` on replicas ``0..replicas-1`` and stack the results.

    Replica ``i`` gets the streams of ``SeedSequence(seed, spawn_key=(i,))``.
    A kernel with an ``enlarge`` keyword is called with ``enlarge=1`` and, if
    it raises :class:`CertificationError`, once more with a larger value.
    Row ``i`` of the result belongs to replica ``i`` whatever ``workers`` is.
    """
    if replicas < 1:
        raise ValueError("replicas must be at least 1")
    workers = default_workers() if workers is None else max(1, int(workers))
    enlarge_ok = _accepts_enlarge(kernel)
    if chunk is None:
        chunk = max(1, min(1024, replicas // (4 * workers) or 1))
    bounds = [(lo, min(lo + chunk, replicas)) for lo in range(0, replicas, chunk)]
    if workers == 1:
        parts = [_chunk(kernel, seed, lo, hi, enlarge_ok) for lo, hi in bounds]
    else:
        parts = Parallel(n_jobs=workers)(
            delayed(_chunk)(kernel, seed, lo, hi, enlarge_ok) for lo, hi in bounds)
    rows = [r for part in parts for r in part]
    return np.stack(rows)
