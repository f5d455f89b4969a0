"""Deterministic bucket/sign draws for the sparse signed projection.

Every (coordinate ``i``, repetition ``j``) pair gets a bucket in ``[0, m)``
and a sign in ``{-1, +1}``. The recipe is bit-exact and platform-independent::

    w = mix64(seed ^ mix64((i << 32) | j))
    bucket = ((w >> 32) * m) >> 32
    sign = +1 if w & 1 == 0 else -1
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

MASK64 = (1 << 64) - 1

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)


class Draw(NamedTuple):
    bucket: int
    sign: int


def _mix64_array(z: np.ndarray) -> np.ndarray:
    # uint64 arithmetic wraps modulo 2**64
    with np.errstate(over="ignore"):
        z = z + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MUL1
        z = (z ^ (z >> np.uint64(27))) * _MUL2
        return z ^ (z >> np.uint64(31))


def mix64(x):
    """SplitMix64 finalizer.

    Accepts a Python int (returns an int) or an integer array (returns a
    ``uint64`` array of the same shape).
    """
    if isinstance(x, (int, np.integer)):
        if not 0 <= int(x) <= MASK64:
            raise ValueError(f"mix64 input out of 64-bit range: {x}")
        return int(_mix64_array(np.array([int(x)], dtype=np.uint64))[0])
    return _mix64_array(np.asarray(x, dtype=np.uint64))


def _check_draw_args(seed: int, m: int) -> None:
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    if not 1 <= m <= 1 << 16:
        raise ValueError(f"sketch dimension must be in [1, 65536], got {m}")


def _reduce(w: np.ndarray, m: int):
    # multiply-shift on the high 32 bits; (w >> 32) * m < 2**48, no overflow
    bucket = ((w >> np.uint64(32)) * np.uint64(m)) >> np.uint64(32)
    sign = np.where((w & np.uint64(1)) == 0, 1, -1).astype(np.int8)
    return bucket.astype(np.int64), sign


def draw(seed: int, i: int, j: int, m: int) -> Draw:
    """Bucket and sign for input coordinate ``i``, repetition ``j``."""
    _check_draw_args(seed, m)
    if not (0 <= i < 1 << 32 and 0 <= j < 1 << 32):
        raise ValueError("coordinate and repetition indices must be < 2**32")
    buckets, signs = draw_grid(seed, np.array([i]), np.array([j]), m)
    return Draw(int(buckets[0]), int(signs[0]))


def draw_grid(seed: int, i, j, m: int):
    """Vectorized :func:`draw` over broadcastable index arrays ``i`` and ``j``.

    Returns ``(buckets, signs)`` as ``int64`` and ``int8`` arrays.
    """
    _check_draw_args(seed, m)
    i = np.asarray(i, dtype=np.uint64)
    j = np.asarray(j, dtype=np.uint64)
    key = (i << np.uint64(32)) | j
    w = _mix64_array(np.uint64(seed) ^ _mix64_array(key))
    return _reduce(w, m)


def draw_table(seed: int, d: int, s: int, m: int):
    """All draws for a ``d``-dimensional input with ``s`` repetitions.

    Returns ``(buckets, signs)`` of shape ``(d, s)``.
    """
    if not (1 <= d <= 1 << 32 and 1 <= s <= 1 << 32):
        raise ValueError("d and s must be in [1, 2**32]")
    i = np.arange(d, dtype=np.uint64)[:, None]
    j = np.arange(s, dtype=np.uint64)[None, :]
    return draw_grid(seed, i, j, m)
