"""Stable seed derivation.

Every random stream in the package is derived from one integer base seed and a
tuple of keys (grid index, stage name).  String keys are mapped through CRC32 so
the derivation does not depend on Python's salted ``hash``.
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


def seed_sequence(seed: int, *keys: int | str) -> np.random.SeedSequence:
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.SeedSequence([int(seed), *(_key_to_int(k) for k in keys)])


def rng(seed: int, *keys: int | str) -> np.random.Generator:
    """PCG64 generator for ``(seed, *keys)``."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *keys)))


def derive_seed(seed: int, *keys: int | str) -> int:
    """A 63-bit integer seed for ``(seed, *keys)``, for recording in outputs."""
    return int(seed_sequence(seed, *keys).generate_state(1, np.uint64)[0] >> np.uint64(1))
