"""
Seed derivation for reproducible random streams.

Every consumer of randomness (signal, matrices, noise, frame sampling and solver
initialization) receives its own generator derived from a master seed and a
fixed role tag, so results never depend on the order in which streams are
consumed. The mix is the splitmix64 finalizer applied to the running state
xor each tag.
"""

from enum import IntEnum

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF


class StreamRole(IntEnum):
    """Fixed role tags for derived streams"""
    SIGNAL = 1
    MATRICES = 2
    NOISE = 3
    FRAME = 4
    INIT = 5


def mix64(value: int) -> int:
    """splitmix64 finalizer on a 64-bit unsigned integer"""
    z = (value + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, *tags: int) -> int:
    """Fold tags into a master seed

    Args:
        master: 64-bit master seed
        tags: integers identifying the consumer (role, cell index, trial index)

    Returns:
        Derived 64-bit seed
    """
    state = mix64(int(master) & MASK64)
    for tag in tags:
        state = mix64(state ^ (int(tag) & MASK64))
    return state


def make_rng(master: int, *tags: int) -> np.random.Generator:
    """Generator over PCG64 seeded with derive_seed(master, *tags)"""
    return np.random.Generator(np.random.PCG64(derive_seed(master, *tags)))
