"""Deterministic RNG derivation.

Every stochastic step in the library draws from a generator derived from a
single 64-bit master seed plus a path of context keys, so whole runs replay
bit-exact regardless of evaluation order.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key_to_int(key) -> int:
    if isinstance(key, (int, np.integer)):
        return int(key) & 0xFFFFFFFFFFFFFFFF
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    raise TypeError(f"unsupported rng path key: {key!r}")


def derive_rng(seed: int, *path) -> np.random.Generator:
    """Generator for ``seed`` specialized by a path of ints/strings."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_key_to_int(k) for k in path]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derive_seed(seed: int, *path) -> int:
    """A 64-bit child seed, usable as the master seed of a sub-computation."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF] + [_key_to_int(k) for k in path])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
