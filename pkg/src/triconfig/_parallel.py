"""Deterministic chunked parallelism.

Work is split into fixed chunks that do not depend on the worker count, and
partial results are reduced in chunk order, so any residual float drift stays
within the documented reassociation tolerance regardless of --threads."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")

_max_workers = 1


def set_max_workers(n: int) -> None:
    global _max_workers
    _max_workers = max(1, int(n))


def get_max_workers() -> int:
    return _max_workers


def workers_from_env(default: int = 1) -> int:
    raw = os.environ.get("TRICONFIG_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return default


def chunk_ranges(n: int, chunk: int) -> list[tuple[int, int]]:
    chunk = max(1, int(chunk))
    return [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]


def map_chunks(fn: Callable[[int, int], T], ranges: Sequence[tuple[int, int]]) -> list[T]:
    """Apply fn(lo, hi) over ranges; results come back in range order."""
    if _max_workers == 1 or len(ranges) <= 1:
        return [fn(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=_max_workers) as pool:
        return list(pool.map(lambda r: fn(*r), ranges))
