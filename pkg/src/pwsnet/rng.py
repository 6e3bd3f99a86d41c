"""Seeding scheme used everywhere randomness appears.

All generators are numpy Philox (a 64-bit counter-based generator), keyed
by explicit integers, so every draw is reproducible across platforms and
independent of execution order. Derived seeds are produced by splitmix64
mixing, documented below so other implementations can reproduce streams.
"""
from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(z: int) -> int:
    """One splitmix64 output step (Steele et al. finalizer)."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def mix_seed(master: int, *indices: int) -> int:
    """Derive a child seed from a master seed and integer indices.

    Each index is folded in with one splitmix64 round, so nearby
    (master, indices) tuples give statistically independent streams.
    """
    z = splitmix64(master & _MASK64)
    for ix in indices:
        z = splitmix64(z ^ ((ix + 1) & _MASK64))
    return z


def make_generator(seed: int) -> np.random.Generator:
    """Philox generator keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))
