"""Reproducible random streams derived from a single integer seed.

Every consumer asks for a stream by ``(seed, tag, *index)``. The tuple is fed
to :class:`numpy.random.SeedSequence` and drives a counter-based Philox
generator, so streams are independent of scheduling order and worker count.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

_MASK64 = (1 << 64) - 1


def _tag_code(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def _entropy(seed: int, tag: str, index: Sequence[int]) -> list[int]:
    if seed < 0:
        raise ValueError("seed must be non-negative")
    # SeedSequence wants non-negative words; split big seeds into 64-bit limbs.
    limbs = []
    s = int(seed)
    while True:
        limbs.append(s & _MASK64)
        s >>= 64
        if not s:
            break
    return [*limbs, len(limbs), _tag_code(tag), *(int(i) for i in index)]


def stream(seed: int, tag: str, *index: int) -> np.random.Generator:
    """Return the generator for ``(seed, tag, index...)``."""
    ss = np.random.SeedSequence(_entropy(seed, tag, index))
    return np.random.Generator(np.random.Philox(ss))


def child_seed(seed: int, tag: str, *index: int) -> int:
    """Derive a new 64-bit integer seed; used to hand a sub-task its own seed."""
    ss = np.random.SeedSequence(_entropy(seed, tag, index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def fresh_seed() -> int:
    """Draw a seed from system entropy (callers should print it)."""
    return int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0])


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    """Order-preserving map, threaded when ``workers > 1``.

    numpy releases the GIL inside BLAS/LAPACK, which is where replicates spend
    their time, so threads are enough here.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
