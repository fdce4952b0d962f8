"""Sub-seed derivation.

Every random draw in the package is made from a ``numpy.random.Generator``
(PCG64) seeded by :func:`derive_seed`, which hashes the root seed together with
a tuple of keys through ``numpy.random.SeedSequence``. String keys are mapped
to integers with CRC32 so the derivation is stable across processes and
platforms.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key_to_int(key: int | str) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    if key < 0:
        raise ValueError(f"seed keys must be non-negative, got {key}")
    return int(key)


def derive_seed(root: int, *keys: int | str) -> int:
    """Return a 63-bit integer seed determined by ``root`` and ``keys``."""
    entropy = [_key_to_int(root)] + [_key_to_int(k) for k in keys]
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])


def make_rng(root: int, *keys: int | str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(root, *keys))
