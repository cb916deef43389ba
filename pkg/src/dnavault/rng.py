"""Deterministic, platform-independent randomness.

All simulated randomness in this package (droplet degrees, segment picks,
base substitutions, read noise, dropout) flows through one fully specified
generator so that identical seeds reproduce identical byte streams on any
machine:

* stream generator: xorshift64* (shifts 12/25/27, multiplier
  0x2545F4914F6CDD1D), state seeded through the splitmix64 finalizer so
  that nearby integer seeds diverge immediately;
* seed derivation from labels/strings: first 8 bytes (big-endian) of the
  SHA-256 of the '/'-joined parts;
* per-item substreams: ``substream(base, i)`` = splitmix-mix of
  ``base + (i + 1) * GOLDEN``, applied once per index level.

The vectorized helpers mirror the scalar class bit for bit; tests assert
the equivalence.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_STAR = 0x2545F4914F6CDD1D


def mix64(z: int) -> int:
    """splitmix64 finalizer: a bijective 64-bit scramble."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def derive_seed(*parts: object) -> int:
    """Derive a 64-bit seed from arbitrary labels (strings, ints, ...)."""
    text = "/".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def substream(base: int, index: int) -> int:
    """Seed for the ``index``-th substream of ``base``; bijective in both args."""
    return mix64((base + (index + 1) * GOLDEN) & MASK64)


class Xorshift64Star:
    """Sequential xorshift64* stream; state never reaches zero."""

    def __init__(self, seed: int):
        state = mix64((seed + GOLDEN) & MASK64)
        self._state = state if state != 0 else GOLDEN

    def next_u64(self) -> int:
        s = self._state
        s ^= s >> 12
        s ^= (s << 25) & MASK64
        s ^= s >> 27
        self._state = s
        return (s * _STAR) & MASK64

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randbelow(self, bound: int) -> int:
        """Uniform integer in [0, bound) via rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % bound

    def sample_distinct(self, count: int, population: int) -> list[int]:
        """``count`` distinct integers from [0, population), sorted.

        Rejection sampling for sparse picks, partial Fisher-Yates when the
        sample covers more than half the population. Both branches are
        deterministic for a given stream state.
        """
        if count > population:
            raise ValueError("cannot sample more values than the population holds")
        if count * 2 > population:
            pool = list(range(population))
            for i in range(count):
                j = i + self.randbelow(population - i)
                pool[i], pool[j] = pool[j], pool[i]
            return sorted(pool[:count])
        chosen: set[int] = set()
        while len(chosen) < count:
            chosen.add(self.randbelow(population))
        return sorted(chosen)


# --- vectorized mirror (numpy uint64, silent wraparound) ---------------------

def seed_states(seeds: np.ndarray) -> np.ndarray:
    """Vectorized equivalent of the Xorshift64Star constructor."""
    z = (seeds.astype(np.uint64) + np.uint64(GOLDEN))
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    z = z ^ (z >> np.uint64(31))
    z[z == 0] = np.uint64(GOLDEN)
    return z


def step_states(states: np.ndarray) -> np.ndarray:
    """Advance every stream one step in place; returns the output values."""
    states ^= states >> np.uint64(12)
    states ^= states << np.uint64(25)
    states ^= states >> np.uint64(27)
    return states * np.uint64(_STAR)


def substream_array(base: np.ndarray | int, indices: np.ndarray) -> np.ndarray:
    """Vectorized ``substream``; ``base`` may be a scalar or a broadcastable array."""
    base_arr = np.asarray(base, dtype=np.uint64)
    z = base_arr + (indices.astype(np.uint64) + np.uint64(1)) * np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))
