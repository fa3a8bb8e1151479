"""Seeded random substreams.

Every random draw in the package comes from a generator keyed by a base seed
and a tuple of integers (replicate index, role, ...). Results therefore do not
depend on evaluation order or on how work is split across processes.
"""

import numpy as np


def substream(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))))


def derive_seed(seed: int, *keys: int) -> int:
    """A 63-bit integer seed derived from ``seed`` and ``keys``."""
    state = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)).generate_state(1, np.uint64)
    return int(state[0] >> np.uint64(1))
