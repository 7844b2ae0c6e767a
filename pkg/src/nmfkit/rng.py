"""Deterministic counter-based uniform generator (splitmix64).

Used instead of a library RNG so that data matrices and initial factors
replay bit-identically from a (seed, stream salt) pair, independent of
platform and library version. Each stream is keyed by mixing the base seed
with a salt, so per-sample streams never overlap.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix_int(z: int) -> int:
    """splitmix64 finalizer on a Python int (no overflow headaches)."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def _mix_array(z: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 finalizer on a uint64 array."""
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def substream_key(seed: int, salt: int) -> int:
    """Derive the key of an independent stream from (seed, salt)."""
    return _mix_int((seed + _GOLDEN * (salt + 1)) & _MASK)


class RandomStream:
    """Stream of uniforms on the open interval (0, 1).

    The k-th output is a pure function of (key, k): splitmix64's state after
    k steps is key + k * GOLDEN, so blocks are generated by mixing a counter
    range. Entries fill matrices in row-major order.
    """

    def __init__(self, key: int):
        self._key = key & _MASK
        self._count = 0

    def uniform(self, rows: int, cols: int) -> np.ndarray:
        n = rows * cols
        idx = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        bits = _mix_array(np.uint64(self._key) + np.uint64(_GOLDEN) * idx)
        # (k + 0.5) * 2^-52 for k in [0, 2^52): strictly inside (0, 1)
        u = ((bits >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0**-52
        return u.reshape(rows, cols)


def stream_for(seed: int, salt: int) -> RandomStream:
    return RandomStream(substream_key(seed, salt))
