"""Deterministic RNG streams and bounded worker parallelism.

Every stochastic component draws from its own numpy Generator derived from
(master_seed, purpose, indices...) through SeedSequence, so results never
depend on scheduling or on how many draws other components consume.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

__all__ = ["stream", "max_workers", "parallel_map", "PURPOSE"]

# Fixed purpose tags keep unrelated streams apart even for equal indices.
PURPOSE = {
    "channel": 1,
    "tx_bits": 2,
    "noise": 3,
    "pilot": 4,
    "rates": 5,
    "metric": 6,
    "misc": 7,
}


def stream(master_seed: int, purpose: str, *indices: int) -> np.random.Generator:
    """Generator for (master_seed, purpose, indices...); stable across runs."""
    key = (int(master_seed), PURPOSE[purpose]) + tuple(int(i) for i in indices)
    return np.random.default_rng(np.random.SeedSequence(key))


def max_workers() -> int:
    """Worker cap from FAMA_SIM_THREADS (default 1, i.e. serial)."""
    raw = os.environ.get("FAMA_SIM_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Map fn over items, preserving order; threads only when allowed.

    Each item must carry its own RNG stream (or be pure), so the result is
    identical at any worker count.
    """
    items = list(items)
    workers = min(max_workers(), len(items)) or 1
    if workers == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
