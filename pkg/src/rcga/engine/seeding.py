from __future__ import annotations

import struct
from typing import Union

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    """One SplitMix64 output for ``state`` (the increment is applied here)."""
    z = (state + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix(base_seed: int, index: int) -> int:
    """Seed of replication ``index``: splitmix64(base + gamma * index)."""
    return splitmix64((base_seed + GOLDEN_GAMMA * index) & MASK64)


def _coordinate(value: Union[int, float]) -> int:
    if isinstance(value, float) and not value.is_integer():
        return struct.unpack("<Q", struct.pack("<d", value))[0]
    return int(value) & MASK64


def derive_seed(base_seed: int, *coords: Union[int, float]) -> int:
    """Chain ``mix`` over grid coordinates, e.g. ``derive_seed(base, n, K)``."""
    seed = base_seed & MASK64
    for c in coords:
        seed = mix(seed, _coordinate(c))
    return seed
