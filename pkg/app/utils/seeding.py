"""
Reproducible random streams
Every (seed, stream key) pair maps to its own counter-based Philox generator, so results do
not depend on the order in which trials run or on the number of worker threads
"""
import numpy as np

_MASK = (1 << 64) - 1


def stream(seed: int, *key: int) -> np.random.Generator:
    """Philox generator for the stream (seed, *key)"""
    entropy = [int(seed) & _MASK] + [int(k) & _MASK for k in key]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
