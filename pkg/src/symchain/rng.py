"""Seedable, portable random source.

Datasets must be byte-identical across platforms and Python versions, so we
pin the generator rather than rely on `random`: SplitMix64 (Steele, Lea &
Flood 2014) with unbiased rejection sampling for bounded draws and a
Fisher-Yates shuffle.  Independent child streams are derived by folding a
branch key into the parent seed through one scrambler round.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _scramble(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        return _scramble(self._state)

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n), bias-free via rejection."""
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], inclusive."""
        return lo + self.randrange(hi - lo + 1)

    def chance(self, p: float) -> bool:
        """True with probability p (p in [0, 1])."""
        if p <= 0.0:
            return False
        if p >= 1.0:
            return True
        return self.next_u64() < p * (1 << 64)

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]


def derive_seed(seed: int, *branch: int) -> int:
    """Deterministic child seed for (seed, branch...): one scrambler round
    per key, so sibling streams never overlap in practice."""
    x = _scramble((seed + _GOLDEN) & _MASK)
    for key in branch:
        x = _scramble(((x ^ (key & _MASK)) + _GOLDEN) & _MASK)
    return x
