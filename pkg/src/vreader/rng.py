"""Deterministic random-stream derivation.

All randomness in the workbench flows through here: a stream is a pure
function of (master_seed, key...) so any unit of work (one stack, one
noise field, one decision draw) can be generated in isolation, in any
order, on any number of workers, and still be bit-identical.
"""

import zlib

import numpy as np


def key_to_int(key) -> int:
    """Map a stream key (int or short string tag) to a 32-bit integer."""
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    return int(key) & 0xFFFFFFFF


def derive_rng(master_seed: int, *keys) -> np.random.Generator:
    """Generator seeded from a master seed plus purpose keys.

    Keys may be integers (stack ids, levels) or string tags
    ("background", "complexity", "decision", ...).
    """
    entropy = [int(master_seed) & 0xFFFFFFFFFFFFFFFF]
    entropy.extend(key_to_int(k) for k in keys)
    return np.random.default_rng(np.random.SeedSequence(entropy))
