"""Reproducible random streams for parallel Monte Carlo.

Streams are built on the Philox counter-based generator keyed directly by
(seed, replica): replica i of a run with seed s always sees the same
stream, no matter how many replicas run or in what order.
"""

from __future__ import annotations

import numpy as np

__all__ = ["replica_rng"]

_MASK64 = (1 << 64) - 1


def replica_rng(seed: int, replica: int = 0) -> np.random.Generator:
    """Independent generator for (seed, replica), stable across runs."""
    key = ((int(seed) & _MASK64) << 64) | (int(replica) & _MASK64)
    return np.random.Generator(np.random.Philox(key=key))
