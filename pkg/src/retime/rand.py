"""Counter-based deterministic random draws.

Every stochastic choice in this package (schedule draws, per-video rate
draws, per-sample augmentation) is a pure function of a 64-bit key and a
counter, so parallel workers can reproduce draw k without sharing any
mutable generator state.  The mixer is SplitMix64, which is cheap,
vectorizes over counters, and has no cross-version stream worries.
"""

from __future__ import annotations

import hashlib

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


def _mix64(z: np.ndarray | np.uint64) -> np.ndarray | np.uint64:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def derive_key(*parts: int) -> int:
    """Fold integer parts into one 64-bit stream key."""
    key = np.uint64(0)
    with np.errstate(over="ignore"):
        for part in parts:
            key = _mix64((key + np.uint64(part & 0xFFFFFFFFFFFFFFFF)) * _GOLDEN)
    return int(key)


def stable_id_hash(s: str) -> int:
    """64-bit hash of a string that is stable across processes and platforms."""
    digest = hashlib.sha256(s.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def uniform_at(key: int, counter: int) -> float:
    """The counter-th uniform draw in [0, 1) of stream `key`."""
    return float(uniform_block(key, counter, 1)[0])


def uniform_block(key: int, start: int, count: int) -> np.ndarray:
    """Draws `start` .. `start + count - 1` of stream `key`, vectorized."""
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    counters = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        state = (np.uint64(key & 0xFFFFFFFFFFFFFFFF) + (counters + np.uint64(1)) * _GOLDEN) & _U64
        bits = _mix64(state)
    return (bits >> np.uint64(11)).astype(np.float64) * _INV_2_53
