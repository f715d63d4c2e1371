"""Deterministic seed derivation from structured keys.

String keys are reduced with CRC32 so derived seeds are stable across
processes (Python's ``hash`` is salted per interpreter).
"""
import zlib

import numpy as np


def _key_int(key) -> int:
    if isinstance(key, (int, np.integer)):
        return int(key) & 0xFFFFFFFF
    return zlib.crc32(str(key).encode("utf-8"))


def derive_seed(*keys) -> int:
    ss = np.random.SeedSequence([_key_int(k) for k in keys])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def derive_rng(*keys) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([_key_int(k) for k in keys]))
