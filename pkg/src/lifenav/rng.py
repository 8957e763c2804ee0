"""Deterministic seeded randomness.

All stochastic behavior in the package flows through two primitives:

* ``splitmix64`` -- a counter-based 64-bit mixer, used directly for bulk
  pseudo-feature / weight generation (vectorized with numpy) and for
  deriving independent sub-seeds.
* ``Rng`` -- xoshiro256** seeded from splitmix64, used for sequential
  decisions (scene layout, start poses, epsilon-greedy draws).

Both are tiny, fully specified algorithms so runs reproduce bit-for-bit
across platforms and language ports.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_INV_2_53 = 1.0 / (1 << 53)


def mix64(x: int) -> int:
    """The splitmix64 finalizer (Steele et al.)."""
    x &= MASK64
    x ^= x >> 30
    x = (x * _MIX1) & MASK64
    x ^= x >> 27
    x = (x * _MIX2) & MASK64
    x ^= x >> 31
    return x


def splitmix64(seed: int, index: int) -> int:
    """Value ``index`` of the splitmix64 stream started at ``seed``."""
    return mix64((seed + (index + 1) * _GOLDEN) & MASK64)


def derive_key(seed: int, *parts: int) -> int:
    """Derive an independent 64-bit sub-seed from a seed and integer tags."""
    key = mix64(seed)
    for part in parts:
        key = mix64(key ^ mix64(part & MASK64))
    return key


def uniform_signed_array(seed: int, count: int) -> np.ndarray:
    """``count`` doubles uniform in [-1, 1), from the splitmix64 stream.

    Vectorized but value-identical to ``splitmix64(seed, i)`` followed by
    ``(v >> 11) * 2**-53 * 2 - 1``.
    """
    idx = np.arange(1, count + 1, dtype=np.uint64)
    x = (np.uint64(seed & MASK64) + idx * np.uint64(_GOLDEN)).astype(np.uint64)
    x ^= x >> np.uint64(30)
    x *= np.uint64(_MIX1)
    x ^= x >> np.uint64(27)
    x *= np.uint64(_MIX2)
    x ^= x >> np.uint64(31)
    return (x >> np.uint64(11)).astype(np.float64) * (2.0 * _INV_2_53) - 1.0


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Rng:
    """xoshiro256** seeded via splitmix64; sequential scalar draws."""

    def __init__(self, seed: int):
        self._s = [splitmix64(seed, i) for i in range(4)]

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * _INV_2_53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randrange(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randrange bound must be positive")
        return self.next_u64() % n

    def choice(self, seq):
        if not seq:
            raise ValueError("choice from empty sequence")
        return seq[self.randrange(len(seq))]

    def sample_indices(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n), order randomized (Fisher-Yates prefix)."""
        if k > n:
            raise ValueError("sample larger than population")
        pool = list(range(n))
        for i in range(k):
            j = i + self.randrange(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
