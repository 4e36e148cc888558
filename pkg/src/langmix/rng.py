"""Deterministic RNG primitives: splitmix64, fnv1a64, Fisher-Yates.

Everything here is integer arithmetic mod 2^64 so that the same seed
produces the same stream on any platform. Used for reproducible word
sampling in forge and for per-request seeds in fetch.
"""

from __future__ import annotations

from typing import List, Sequence, TypeVar

T = TypeVar("T")

_MASK64 = (1 << 64) - 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(data: "str | bytes") -> int:
    """64-bit FNV-1a hash; strings are hashed as UTF-8."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def derive_seed(seed: int, stream_id: str = "") -> int:
    """Per-row seed: base seed XOR fnv1a64 of the row/stream identifier."""
    return (seed & _MASK64) ^ fnv1a64(stream_id)


class SplitMix64:
    """splitmix64 generator (Steele et al.); one 64-bit output per step."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Next output reduced by modulo; bound must be positive."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self.next() % bound


def fisher_yates(items: Sequence[T], rng: SplitMix64) -> List[T]:
    """Return a shuffled copy, consuming one rng output per swap step."""
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        j = rng.below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out
