"""Reproducible random streams.

Every random draw in the package comes from a Philox counter-based generator
keyed by a 64-bit seed. Per-replication seeds are derived with :func:`mix64`
so that replication ``r`` sees the same stream however the work is split
across workers.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One step of the SplitMix64 generator: add the golden-ratio increment, then mix."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def mix64(master: int, index: int) -> int:
    """Seed of substream ``index`` under ``master``: ``splitmix64(splitmix64(master) ^ index)``."""
    return splitmix64(splitmix64(master & _MASK) ^ (index & _MASK))


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed & _MASK))


def open_uniform(rng: np.random.Generator, size) -> np.ndarray:
    """Uniforms on the open interval (0, 1), on a grid of spacing 2**-53."""
    return (rng.integers(0, 1 << 53, size=size, dtype=np.int64) + 0.5) * 2.0**-53
