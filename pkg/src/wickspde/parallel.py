"""Reproducible block-parallel Monte Carlo.

Paths are grouped into fixed-size blocks; block ``b`` always draws from
``SeedSequence(seed, spawn_key=(b,))``.  Results therefore depend only on the
seed and the block size, never on the number of workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

import numpy as np

STREAM_PROTOCOL = "seedsequence-spawnkey-v1"
DEFAULT_BLOCK = 250


def block_rng(seed: int, block_id: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, block_id)))


def block_sizes(n_items: int, block_size: int = DEFAULT_BLOCK) -> list:
    full, rest = divmod(n_items, block_size)
    return [block_size] * full + ([rest] if rest else [])


def default_workers() -> int:
    env = os.environ.get("WICKSPDE_WORKERS")
    if env:
        return max(1, int(env))
    return 1


def _call(args):
    func, b, size, seed, stream, kwargs = args
    return func(size, block_rng(seed, b, stream), **kwargs)


def run_blocks(func: Callable, n_items: int, seed: int, *, workers: int | None = None,
               block_size: int = DEFAULT_BLOCK, stream: int = 0, **kwargs) -> list:
    """Evaluate ``func(size, rng, **kwargs)`` on every block; results in block order.

    ``func`` must be a module-level callable when ``workers > 1``.
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    tasks = [(func, b, s, seed, stream, kwargs) for b, s in enumerate(block_sizes(n_items, block_size))]
    if workers == 1 or len(tasks) == 1:
        return [_call(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_call, tasks))
