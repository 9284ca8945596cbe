"""Seeded random streams.

All randomness flows through numpy's PCG64 bit generator. Independent
per-trial streams are keyed by ``seed XOR splitmix64(trial)`` so trials can
run in any order and still reproduce.
"""

from __future__ import annotations

import numpy as np

GENERATOR_NAME = "PCG64 (numpy.random.PCG64, XSL-RR 128/64)"

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One SplitMix64 output for state ``x`` (used as an integer hash)."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Stream for one trial, independent of how many other trials ran."""
    return make_rng((int(seed) & _MASK64) ^ splitmix64(int(trial)))


def raw_vector(seed: int, count: int = 3) -> list[int]:
    """First ``count`` raw 64-bit outputs for ``seed`` (for test vectors)."""
    return [int(v) for v in np.random.PCG64(int(seed) & _MASK64).random_raw(count)]
