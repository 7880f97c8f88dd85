"""Deterministic random draws for the Monte Carlo benchmarks.

xorshift64* for uniforms, Box-Muller for normals.  Draws are plain floats
and never differentiated: the pathwise derivative holds them fixed, and the
finite-difference oracle reuses the same seed (common random numbers).
"""

from __future__ import annotations

import math

_MASK = (1 << 64) - 1
_SCALE = 1.0 / (1 << 53)


class Xorshift:
    """xorshift64* with a spare-normal cache for Box-Muller."""

    def __init__(self, seed: int):
        self._state = (seed & _MASK) or 0x9E3779B97F4A7C15
        self._spare: float | None = None

    def next_u64(self) -> int:
        x = self._state
        x ^= (x >> 12)
        x ^= (x << 25) & _MASK
        x ^= (x >> 27)
        self._state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK

    def uniform(self) -> float:
        """Uniform in (0, 1)."""
        u = (self.next_u64() >> 11) * _SCALE
        return u if u > 0.0 else _SCALE

    def normal(self) -> float:
        if self._spare is not None:
            z = self._spare
            self._spare = None
            return z
        u1 = self.uniform()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        self._spare = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)
