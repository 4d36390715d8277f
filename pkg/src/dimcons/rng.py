"""Reproducible chunked randomness and a small thread-pool map.

Work is split into fixed-size chunks; chunk ``c`` of a computation seeded
with ``seed`` draws from ``numpy.random.default_rng([seed, c])``. Results are
merged in chunk order, so the output does not depend on how many threads ran
the chunks.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, TypeVar

import numpy as np

T = TypeVar("T")
THREADS_ENV = "DIMCONS_THREADS"


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, min(8, os.cpu_count() or 1))


def stream(seed: int, chunk: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(seed) & (2**64 - 1), int(chunk)])


def chunk_sizes(total: int, chunk: int) -> List[int]:
    full, rest = divmod(int(total), int(chunk))
    return [chunk] * full + ([rest] if rest else [])


def chunked_map(fn: Callable[[np.random.Generator, int, int], T], total: int, seed: int, chunk: int = 256) -> List[T]:
    """Call ``fn(rng, size, index)`` for each chunk and return results in order."""
    sizes = chunk_sizes(total, chunk)
    jobs = [(stream(seed, i), s, i) for i, s in enumerate(sizes)]
    workers = min(thread_count(), len(jobs))
    if workers <= 1:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))
