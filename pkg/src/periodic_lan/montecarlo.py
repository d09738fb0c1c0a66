"""Seeded, order-deterministic replication runner."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

R = TypeVar("R")


def make_rng(seed: int | None, replication: int | None = None) -> np.random.Generator:
    """Independent PCG64 stream for replication ``r`` of experiment ``seed``."""
    if replication is None:
        ss = np.random.SeedSequence(seed)
    else:
        ss = np.random.SeedSequence(seed, spawn_key=(int(replication),))
    return np.random.Generator(np.random.PCG64(ss))


def default_workers() -> int:
    """Cores available to this process (respects CPU affinity where supported)."""
    if hasattr(os, "sched_getaffinity"):
        return len(os.sched_getaffinity(0)) or 1
    return os.cpu_count() or 1


def run_replications(fn: Callable[[int], R], replications: int, workers: int | None = None) -> list[R]:
    """Evaluate ``fn(r)`` for r = 0..replications-1 and return results in replication order.

    Each replication must draw its randomness only from its own derived
    stream, so any worker count yields identical results.
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or replications <= 1:
        return [fn(r) for r in range(replications)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(replications)))
