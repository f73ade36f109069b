"""Counter-based deterministic randomness helpers.

Every random draw in this package is a pure function of a 64-bit master seed
plus integer stream tags (vertex index, replicate index, slot, ...).  That
makes any single draw recomputable in isolation: sampling the out-edges of
vertex 12 never requires sampling vertices 0..11 first, so results are
independent of iteration order and thread scheduling.

The mixing function is the SplitMix64 finalizer, applied scalar-wise in pure
Python (masked to 64 bits) or vectorized over uint64 numpy arrays.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INIT = 0x6A09E667F3BCC909
_STR_PART = 0x5452545300000000  # marks string parts so "" and 0 hash apart

__all__ = [
    "key64",
    "hashed_u64",
    "hashed_uniform",
    "sub_seed",
    "make_rng",
]


def _mix_scalar(z: int) -> int:
    z = (z + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z += np.uint64(_GOLDEN)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MIX2)
    z ^= z >> np.uint64(31)
    return z


def key64(*parts: int | str) -> int:
    """Collapse a master seed and integer/string tags into one 64-bit key.

    String tags fold via their UTF-8 bytes (8 at a time, little-endian), so
    keys are stable across platforms and Python hash randomization.  A type
    marker is mixed with the length so a string part never collides with an
    integer part of similar value.
    """
    h = _INIT
    for p in parts:
        if isinstance(p, str):
            data = p.encode("utf-8")
            h = _mix_scalar(h ^ _STR_PART ^ len(data))
            for i in range(0, len(data), 8):
                h = _mix_scalar(h ^ int.from_bytes(data[i : i + 8], "little"))
        else:
            h = _mix_scalar(h ^ (int(p) & _MASK))
    return h


def hashed_u64(key: int, idx: np.ndarray | int) -> np.ndarray | int:
    """64-bit hash of each index under ``key``; scalar in, scalar out."""
    if isinstance(idx, np.ndarray):
        return _mix_array(idx.astype(np.uint64) ^ np.uint64(key))
    return _mix_scalar(int(idx) ^ key)


def hashed_uniform(key: int, idx: np.ndarray | int) -> np.ndarray | float:
    """Uniform [0,1) float64 per index, derived from the top 53 hash bits."""
    h = hashed_u64(key, idx)
    if isinstance(h, np.ndarray):
        return (h >> np.uint64(11)).astype(np.float64) * 2.0**-53
    return (h >> 11) * 2.0**-53


def sub_seed(master_seed: int, index: int, tag: int = 0x5EED) -> int:
    """Stable per-replicate (or per-stream) seed derived from the master seed."""
    return key64(master_seed, tag, index)


def make_rng(*parts: int) -> np.random.Generator:
    """A numpy Generator keyed by (seed, tags...) for bulk i.i.d. sampling."""
    return np.random.default_rng(key64(*parts))
