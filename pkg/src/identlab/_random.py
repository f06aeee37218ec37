"""Seeded random streams and replicate-parallel helpers.

Every Monte Carlo routine takes an explicit ``numpy.random.Generator``.
Independent sub-streams are derived from ``(seed, *keys)`` with a keyed
Philox generator, so a replicate block always sees the same random numbers
no matter how many worker threads process the blocks.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

DEFAULT_BLOCK = 1000


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based generator for ``(seed, *keys)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(stream) -> np.random.Generator:
    if isinstance(stream, np.random.Generator):
        return stream
    return np.random.default_rng(stream)


def child_seed(stream: np.random.Generator) -> int:
    """Draw a 63-bit integer used to seed a family of sub-streams."""
    return int(stream.integers(0, 2**63 - 1))


def default_threads() -> int:
    return os.cpu_count() or 1


def block_sizes(reps: int, block: int = DEFAULT_BLOCK) -> list[int]:
    full, rest = divmod(reps, block)
    return [block] * full + ([rest] if rest else [])


def run_blocks(
    fn: Callable[[np.random.Generator, int], np.ndarray],
    reps: int,
    seed: int,
    key: Sequence[int] = (),
    threads: int | None = 1,
    block: int = DEFAULT_BLOCK,
) -> np.ndarray:
    """Evaluate ``fn(rng, size)`` over fixed-size replicate blocks.

    Block ``b`` uses ``substream(seed, *key, b)``; results are concatenated
    in block order, so the output does not depend on ``threads``.
    """
    sizes = block_sizes(reps, block)
    tasks = [(substream(seed, *key, b), size) for b, size in enumerate(sizes)]
    threads = threads or default_threads()
    if threads == 1 or len(tasks) == 1:
        parts = [fn(rng, size) for rng, size in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda t: fn(*t), tasks))
    return np.concatenate(parts, axis=0)
