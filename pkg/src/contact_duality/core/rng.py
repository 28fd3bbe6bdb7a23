"""
Counter-based random streams.

Every stream is a Philox generator keyed by (seed, family, index), so a
stream can be regenerated on its own, in any order, in any process.
"""

from enum import IntEnum

import numpy as np


class StreamFamily(IntEnum):
    """Stream families; the value is part of the key."""
    DEATHS = 0
    ARROWS = 1
    TIE_BREAK = 2
    REPLICA = 3
    INSTANCE = 4
    SUBRUN = 5


def stream(seed: int, family: int, index: int) -> np.random.Generator:
    """
    Build the generator for one stream.

    Args:
        seed: Run seed (64-bit)
        family: Stream family (see StreamFamily)
        index: Stream index inside the family (site id, edge id, replica...)

    Returns:
        Independent numpy Generator
    """
    seq = np.random.SeedSequence(int(seed), spawn_key=(int(family), int(index)))
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(seed: int, family: int, index: int) -> int:
    """Derive a 64-bit seed keyed by (seed, family, index)."""
    seq = np.random.SeedSequence(int(seed), spawn_key=(int(family), int(index)))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def replica_seed(seed: int, index: int) -> int:
    """Seed of replica `index` of a run."""
    return derive_seed(seed, StreamFamily.REPLICA, index)


def subrun_seed(seed: int, index: int) -> int:
    """Seed of an auxiliary estimate inside an experiment (kept apart from replica seeds)."""
    return derive_seed(seed, StreamFamily.SUBRUN, index)
