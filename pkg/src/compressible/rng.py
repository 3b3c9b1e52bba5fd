"""Seeding.

All randomness uses numpy's PCG64 bit generator seeded through
``SeedSequence``.  Child streams are derived from ``(master_seed, *key)``
through the sequence's spawn key, so every trial and role owns an
independent stream regardless of execution order.
"""

from __future__ import annotations

import os
import zlib

import numpy as np

SEED_ENV = "COMPRESSIBLE_SEED"
DEFAULT_SEED = 20120101


def make_rng(seed, *key) -> np.random.Generator:
    """A PCG64 generator for ``seed`` and an optional integer/str key path."""
    if isinstance(seed, np.random.Generator):
        return seed
    spawn = tuple(_key_int(k) for k in key)
    ss = np.random.SeedSequence(int(seed) & ((1 << 64) - 1), spawn_key=spawn)
    return np.random.Generator(np.random.PCG64(ss))


def child_seed(seed, *key) -> int:
    """A 64-bit integer seed derived from ``seed`` and ``key``."""
    spawn = tuple(_key_int(k) for k in key)
    ss = np.random.SeedSequence(int(seed) & ((1 << 64) - 1), spawn_key=spawn)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, DEFAULT_SEED))


def _key_int(k) -> int:
    if isinstance(k, str):
        return zlib.crc32(k.encode())
    return int(k)
