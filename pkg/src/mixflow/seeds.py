"""Deterministic RNG stream derivation.

Every run owns a single root seed; all randomness flows through streams
derived from (seed, purpose[, index]) via numpy SeedSequence spawn keys.
Training uses one stream per iteration (purpose TRAIN, index = global
iteration number) so that resuming at iteration k from a checkpoint
reproduces exactly the same draws as a longer uninterrupted run with the
same seed.
"""

import numpy as np

# Purpose codes are part of the reproducibility contract; do not renumber.
INIT = 0
TRAIN = 1
SAMPLE = 2
SLOWFLOW = 3


def derived_rng(seed: int, purpose: int, index: int = 0) -> np.random.Generator:
    """Independent generator for (seed, purpose, index)."""
    ss = np.random.SeedSequence(seed, spawn_key=(purpose, index))
    return np.random.Generator(np.random.PCG64(ss))


def derived_seed(seed: int, purpose: int, index: int = 0) -> int:
    """Integer child seed, for APIs that take a seed rather than a Generator."""
    ss = np.random.SeedSequence(seed, spawn_key=(purpose, index))
    return int(ss.generate_state(1, np.uint64)[0])


def iteration_rng(seed: int, iteration: int) -> np.random.Generator:
    """Stream for one global training iteration."""
    return derived_rng(seed, TRAIN, iteration)
