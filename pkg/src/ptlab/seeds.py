"""Deterministic RNG streams derived from (master seed, purpose tag, indices).

Every random draw in the package flows through `stream`, so campaigns are
reproducible regardless of execution order or worker count.
"""

import numpy as np


def _tag_int(tag):
    return int.from_bytes(tag.encode("utf-8"), "little")


def seed_sequence(master, tag, *indices):
    entropy = [int(master) & 0xFFFFFFFFFFFFFFFF, _tag_int(tag)]
    entropy.extend(int(i) for i in indices)
    return np.random.SeedSequence(entropy)


def stream(master, tag, *indices):
    """Generator for (master, tag, *indices); same arguments, same stream."""
    return np.random.default_rng(seed_sequence(master, tag, *indices))


def as_rng(seed_or_rng):
    """Accept a Generator, a raw int seed, or None (fresh entropy)."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)
