"""Seedable permutations with a fixed, documented generator.

The stream is xorshift64* (Vigna 2016: shifts 12, 25, 27; multiplier
0x2545F4914F6CDD1D), seeded by one round of splitmix64 so that any integer
seed, including 0, yields a nonzero state.  Permutations use Fisher-Yates
with rejection sampling for unbiased bounded integers.
"""

from __future__ import annotations

import hashlib

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class XorShift64Star:
    def __init__(self, seed: int):
        state = splitmix64(seed & MASK64)
        self.state = state or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & MASK64

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n


def permutation(n: int, seed: int) -> list[int]:
    """Uniform random permutation of ``range(n)`` (Fisher-Yates)."""
    rng = XorShift64Star(seed)
    out = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def derive_seed(master: int, label: str) -> int:
    """Stage seed: first 8 bytes (big-endian) of sha256("<master>:<label>")."""
    digest = hashlib.sha256(f"{master}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")
