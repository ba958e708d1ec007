"""Counter-based random streams.

Samples are processed in fixed-size blocks. Block ``b`` of stream ``s`` under
seed ``seed`` always draws from a Philox generator keyed by (seed, s, b), so
the values a sample sees do not depend on how blocks are spread across
workers. Block results are combined in block order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

T = TypeVar("T")

WORKERS_ENV = "STARTAIL_WORKERS"
MAX_BLOCK = 1 << 16
_MASK64 = (1 << 64) - 1


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def block_rng(seed: int, block: int, stream: int = 0) -> np.random.Generator:
    key = np.array([seed & _MASK64, ((stream & 0xFFFF) << 48) | (block & ((1 << 48) - 1))],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def block_size_for(width: int) -> int:
    """Samples per block, keeping one block's working array near 4M entries."""
    size = MAX_BLOCK
    while size > 256 and size * max(width, 1) > (1 << 22):
        size >>= 1
    return size


def run_blocks(fn: Callable[[np.random.Generator, int], T], samples: int, seed: int,
               width: int = 1, stream: int = 0, workers: int | None = None) -> list[T]:
    """Apply ``fn(rng, count)`` to every block; results come back in block order."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    bs = block_size_for(width)
    nblocks = -(-samples // bs)
    sizes = [bs] * (nblocks - 1) + [samples - bs * (nblocks - 1)]

    def task(b: int) -> T:
        return fn(block_rng(seed, b, stream), sizes[b])

    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or nblocks == 1:
        return [task(b) for b in range(nblocks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, range(nblocks)))
