"""Counter-based keyed randomness (splitmix64) for order-independent coins.

Every coin is a pure function of ``(seed, round, word)``; the scalar and the
numpy paths produce bit-identical values.
"""

from __future__ import annotations

import numpy as np

MASK = (1 << 64) - 1
_G1 = 0x9E3779B97F4A7C15
_G2 = 0xD1B54A32D192ED03
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_SCALE = 2.0 ** -53

STREAM_ACTIVATE = 0
STREAM_FLIP = 1
STREAM_COUPLE_X_ACT = 2
STREAM_COUPLE_Y_ACT = 3
STREAM_COUPLE_X_FLIP = 4
STREAM_COUPLE_Y_FLIP = 5
STREAM_COUPLE_GROUP = 6


def _mix(z: int) -> int:
    z &= MASK
    z = ((z ^ (z >> 30)) * _M1) & MASK
    z = ((z ^ (z >> 27)) * _M2) & MASK
    return z ^ (z >> 31)


def key_word(pres: int, lo: int, hi: int, stream: int) -> int:
    """Pack a cluster key and a stream id into one 64-bit word."""
    return (pres << 24) | (lo << 12) | (hi << 3) | stream


def keyed_u64(seed: int, rnd: int, word: int) -> int:
    base = _mix((seed & MASK) + _G1 * (rnd + 1))
    return _mix(base + _G2 * (word + 1))


def keyed_uniform(seed: int, rnd: int, word: int) -> float:
    return (keyed_u64(seed, rnd, word) >> 11) * _SCALE


def _mix_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def keyed_uniform_np(seed, rnd: int, words) -> np.ndarray:
    """Vectorised :func:`keyed_uniform`; ``seed`` and ``words`` broadcast."""
    with np.errstate(over="ignore"):
        seed = np.asarray(seed, dtype=np.uint64)
        words = np.asarray(words, dtype=np.uint64)
        base = _mix_np(seed + np.uint64((_G1 * (rnd + 1)) & MASK))
        h = _mix_np(base + np.uint64(_G2) * (words + np.uint64(1)))
    return (h >> np.uint64(11)).astype(np.float64) * _SCALE


def derive_seed(seed: int, index: int) -> int:
    """Independent per-chain seed for batch runs."""
    return _mix((seed & MASK) ^ _mix(_G2 * (index + 1)))


def derive_seeds_np(seed: int, count: int) -> np.ndarray:
    with np.errstate(over="ignore"):
        idx = np.arange(1, count + 1, dtype=np.uint64)
        inner = _mix_np(np.uint64(_G2) * idx)
        return _mix_np(np.uint64(seed & MASK) ^ inner)
