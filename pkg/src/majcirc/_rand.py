"""Deterministic seed derivation shared by every randomized component.

A single user-facing 64-bit seed is fanned out to independent streams by
hashing the seed together with a label path (strings and integers).  The
derivation is a plain blake2b digest, so it is stable across platforms and
interpreter versions, and two distinct label paths never collide in practice.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(seed: int, *labels) -> int:
    """Map (seed, labels...) to a 64-bit sub-seed."""
    h = hashlib.blake2b(digest_size=8)
    h.update(repr((int(seed),) + tuple(labels)).encode())
    return int.from_bytes(h.digest(), "big")


def philox(seed: int, *labels) -> np.random.Generator:
    """Counter-based generator keyed by a derived sub-seed.

    Streams for distinct label paths are independent, which lets chunked
    computations draw their randomness without any sequential coupling:
    chunk c of a sampling job uses philox(seed, "job", c) no matter which
    worker processes it, so results cannot depend on scheduling.
    """
    return np.random.Generator(np.random.Philox(key=derive_seed(seed, *labels)))
