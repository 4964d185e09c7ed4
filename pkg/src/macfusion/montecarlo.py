"""Monte Carlo configuration and seeded substreams.

Trials are cut into fixed-size blocks. Block ``b`` of stream ``tag`` always
draws from the generator seeded by ``SeedSequence(master_seed,
spawn_key=(tag, b))``. Workers only decide which blocks run where, so results do
not depend on the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, TypeVar

import numpy as np

T = TypeVar("T")

DEFAULT_BLOCK = 1024


@dataclass(frozen=True)
class McConfig:
    trials: int = 10_000
    master_seed: int = 0
    # number of evenly spaced quantile levels of the pooled sample
    threshold_levels: int = 512
    workers: int = 1
    block_size: int = DEFAULT_BLOCK

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if self.threshold_levels < 2:
            raise ValueError("threshold_levels must be >= 2")

    def blocks(self) -> list[tuple[int, int]]:
        """(block index, trials in block) covering ``trials``."""
        full, rest = divmod(self.trials, self.block_size)
        out = [(b, self.block_size) for b in range(full)]
        if rest:
            out.append((full, rest))
        return out


def substream(master_seed: int, tag: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(tag), int(block)))
    return np.random.Generator(np.random.PCG64(ss))


def run_blocks(
    mc: McConfig, tag: int, fn: Callable[[int, np.random.Generator], T]
) -> list[T]:
    """Run ``fn(n, rng)`` for every block, returning results in block order."""
    jobs = mc.blocks()

    def one(job):
        b, n = job
        return fn(n, substream(mc.master_seed, tag, b))

    if mc.workers == 1 or len(jobs) == 1:
        return [one(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=mc.workers) as pool:
        return list(pool.map(one, jobs))


def default_workers() -> int:
    return max(1, min(8, os.cpu_count() or 1))
