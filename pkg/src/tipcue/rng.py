"""SplitMix64: a small, fully specified 64-bit generator.

Chosen so seeds reproduce across languages and platforms. The exact
algorithm, so reimplementations can match bit-for-bit:

  state    <- (state + 0x9E3779B97F4A7C15) mod 2^64
  z = state
  z <- ((z XOR (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
  z <- ((z XOR (z >> 27)) * 0x94D049BB133111EB) mod 2^64
  output   =  z XOR (z >> 31)

uniform() maps the top 53 bits onto [0, 1): (output >> 11) * 2^-53.

Sub-streams: derive_seed(seed, k) seeds a child generator with the first
output of SplitMix64(seed XOR ((k+1) * 0x9E3779B97F4A7C15 mod 2^64)), so
per-item streams are independent of iteration order.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    """Deterministic 64-bit generator with a documented state advance."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        u = (self.next_u64() >> 11) * 2.0**-53
        return lo + (hi - lo) * u

    def randrange(self, n: int) -> int:
        """Integer in [0, n) by rejection, unbiased."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (_MASK64 + 1) - ((_MASK64 + 1) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n


def derive_seed(seed: int, k: int) -> int:
    """Child seed for sub-stream k; independent of draw order elsewhere."""
    return SplitMix64((seed ^ (((k + 1) * _GOLDEN) & _MASK64)) & _MASK64).next_u64()
