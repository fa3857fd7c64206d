"""Platform-independent random stream (splitmix64).

Reference step, all mod 2**64:
    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

Identical seeds yield identical streams everywhere, which is what makes
corpus builds byte-reproducible.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def splitmix64_next(state: int) -> tuple[int, int]:
    """One reference step: returns (new_state, output)."""
    state = (state + _GAMMA) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


def fnv1a64(text: str) -> int:
    """FNV-1a 64-bit string hash; used to derive per-scene seeds."""
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK
    return h


class Rng:
    """Sequential splitmix64 generator with the usual integer/float helpers."""

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state, out = splitmix64_next(self.state)
        return out

    def rand_below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection sampling (no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def rand_float(self) -> float:
        """Uniform in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * 2.0**-53

    def bernoulli(self, p: float) -> bool:
        return self.rand_float() < p


def derive_scene_seed(corpus_seed: int, scene_id: str) -> int:
    """Scene seed = one splitmix64 output of (corpus_seed XOR hash(scene_id))."""
    _, out = splitmix64_next((corpus_seed ^ fnv1a64(scene_id)) & _MASK)
    return out
