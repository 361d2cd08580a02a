"""Counter-based random streams with stateless per-matrix seeding.

Every matrix draw owns an independent Philox stream whose key is derived
from ``(seed, dim, index)`` alone. Results therefore do not depend on how
matrix indices are split between workers or processed in blocks.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
SEED_ENV_VAR = "HAARSPACING_SEED"


def mix64(x: int) -> int:
    """SplitMix64 finalizer: a bijective 64-bit mixing function."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def stream_key(seed: int, dim: int, index: int) -> tuple[int, int]:
    """128-bit Philox key for matrix ``index`` of dimension ``dim``.

    The first word mixes the global seed with the dimension so different
    table columns never share draws; the second word is the matrix index.
    """
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if index < 0:
        raise ValueError(f"index must be non-negative, got {index}")
    return mix64(mix64(seed) ^ dim), index & MASK64


class RandomStream:
    """Uniform and standard normal variates from one Philox stream.

    Normals come from the Box-Muller transform, two normals per pair of
    uniforms. An odd request discards the unused second normal, so call
    sites that care about consumption should ask for even counts.
    """

    def __init__(self, key: tuple[int, int]):
        self.key = key
        self._gen = np.random.Generator(np.random.Philox(key=list(key)))

    @classmethod
    def for_matrix(cls, seed: int, dim: int, index: int) -> "RandomStream":
        return cls(stream_key(seed, dim, index))

    def uniform(self, size=None):
        """Uniform variates on [0, 1)."""
        return self._gen.random(size)

    def normal(self, size: int) -> np.ndarray:
        pairs = (size + 1) // 2
        u = self._gen.random(2 * pairs)
        # 1 - u lies in (0, 1], keeping log finite
        rad = np.sqrt(-2.0 * np.log1p(-u[0::2]))
        ang = 2.0 * np.pi * u[1::2]
        out = np.empty(2 * pairs)
        out[0::2] = rad * np.cos(ang)
        out[1::2] = rad * np.sin(ang)
        return out[:size]

    def integers(self, high: int) -> int:
        """Uniform integer on ``{0, ..., high - 1}`` from a single uniform draw."""
        return min(int(self._gen.random() * high), high - 1)
