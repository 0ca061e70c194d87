"""SplitMix64 pseudo-random generator and a Fisher-Yates shuffle built on it.

Corpus shuffles must reproduce bit-for-bit across platforms and language
runtimes, so the generator is pinned to a small, published algorithm
(SplitMix64, Steele et al.) rather than whatever the host runtime ships.
All arithmetic is modulo 2**64.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """SplitMix64 stream seeded with a 64-bit integer.

    next_u64() advances the state by the golden-gamma increment and applies
    the standard two-round mix. Identical seeds always yield identical
    streams, independent of platform or interpreter version.
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_below(self, bound: int) -> int:
        """Unbiased draw from [0, bound) via rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % bound

    def next_float(self) -> float:
        """Uniform float in [0, 1) using the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53


def fisher_yates(n: int, seed: int) -> list[int]:
    """Deterministic permutation of range(n).

    Classic descending Fisher-Yates: for i from n-1 down to 1, swap
    position i with a SplitMix64 draw from [0, i]. The pairing of this
    exact loop with SplitMix64 is the documented shuffle identity of the
    toolkit; reimplementations must match it to reproduce corpus orders.
    """
    rng = SplitMix64(seed)
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.next_below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm
