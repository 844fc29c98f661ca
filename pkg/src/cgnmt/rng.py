"""Deterministic 64-bit random number generation.

Every stochastic choice in the toolkit (corpus synthesis, weight
initialization, epoch shuffling) goes through ``Xorshift64Star`` so that
runs are bit-reproducible across platforms and Python versions.  The
generator is Marsaglia's xorshift64 with Vigna's star multiplier; seeds
are mixed through one round of splitmix64 so that small consecutive
seeds yield unrelated streams.  The stdlib ``random`` module is
deliberately not used anywhere.
"""

from __future__ import annotations

from typing import MutableSequence

import numpy as np

_MASK64 = (1 << 64) - 1
_STAR_MULT = 0x2545F4914F6CDD1D
_DOUBLE_SCALE = 1.0 / (1 << 53)


def splitmix64(x: int) -> int:
    """One splitmix64 step, used for seed mixing."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


class Xorshift64Star:
    """xorshift64* stream with a splitmix64-mixed seed.

    ``randrange`` uses plain modulo reduction.  The tiny modulo bias is
    irrelevant at toy-corpus scale and keeps the mapping from stream to
    values trivially portable.
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        state = splitmix64(seed & _MASK64)
        if state == 0:
            # xorshift has a fixed point at zero; any nonzero constant works.
            state = 0x9E3779B97F4A7C15
        self._state = state

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & _MASK64
        x ^= x >> 27
        self._state = x
        return (x * _STAR_MULT) & _MASK64

    def uniform(self) -> float:
        """Double in [0, 1) built from the top 53 bits."""
        return (self.next_u64() >> 11) * _DOUBLE_SCALE

    def uniform_range(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.uniform()

    def randrange(self, n: int) -> int:
        """Integer in [0, n)."""
        if n <= 0:
            raise ValueError(f"randrange bound must be positive, got {n}")
        return self.next_u64() % n

    def randint(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi], inclusive on both ends."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.randrange(hi - lo + 1)

    def shuffle(self, items: MutableSequence) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]

    def fill_uniform(self, arr: np.ndarray, lo: float, hi: float) -> None:
        """Fill an array row-major with uniform draws from [lo, hi)."""
        flat = arr.reshape(-1)
        span = hi - lo
        for i in range(flat.size):
            flat[i] = lo + span * self.uniform()
