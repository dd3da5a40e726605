"""Counter-based, splittable random streams.

Every stream is addressed by (master seed, *path); the same address always
yields the same stream, independent of creation order, so replicates never
couple and any subset of an experiment can be reproduced in isolation.
"""

from __future__ import annotations

import numpy as np

_SEED_MASK = (1 << 64) - 1  # seeds are 64-bit unsigned


def stream(master_seed: int, *path: int) -> np.random.Generator:
    """Independent generator for the given address, backed by Philox."""
    ss = np.random.SeedSequence(int(master_seed) & _SEED_MASK, spawn_key=tuple(path))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(master_seed: int, *path: int) -> int:
    """A 64-bit sub-seed for a child experiment at the given address."""
    ss = np.random.SeedSequence(int(master_seed) & _SEED_MASK, spawn_key=tuple(path))
    return int(ss.generate_state(1, np.uint64)[0])


def categorical(rng: np.random.Generator, probs: np.ndarray, size: int) -> np.ndarray:
    """size independent draws from one probability vector, by inverse CDF."""
    cum = np.cumsum(probs)
    u = rng.random(size)
    return np.minimum(np.searchsorted(cum, u, side="right"), len(probs) - 1)


def categorical_rows(
    rng: np.random.Generator, kernel: np.ndarray, rows: np.ndarray
) -> np.ndarray:
    """One draw per entry of rows, entry i from kernel row rows[i].

    Uniforms are consumed in entry order from the supplied stream.
    """
    cum = np.cumsum(kernel, axis=1)[rows]
    u = rng.random(len(rows))
    idx = (cum <= u[:, None]).sum(axis=1)
    return np.minimum(idx, kernel.shape[1] - 1)
