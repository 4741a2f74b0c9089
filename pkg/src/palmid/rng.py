"""Self-contained SplitMix64 generator for reproducible shuffles.

Train/test splits must be replayable byte for byte, anywhere, so the
shuffle RNG is pinned to a fully specified 64-bit recurrence instead of
a platform RNG:

    state = (state + 0x9E3779B97F4A7C15) mod 2^64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1E3B69F9) mod 2^64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2^64
    output = z ^ (z >> 31)

Shuffling is the classic Fisher-Yates walk from the top index down,
drawing each position as ``next_u64() mod (i + 1)``.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _scramble(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1E3B69F9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def seed_from(*words: int) -> int:
    """Fold any number of integer words into one 64-bit seed."""
    h = 0
    for w in words:
        h = _scramble((h + _GOLDEN) ^ (w & _MASK64))
    return h


class SplitMix64:
    """Deterministic 64-bit generator; equal seeds give equal streams."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _scramble(self._state)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_u64() % (i + 1)
            items[i], items[j] = items[j], items[i]
