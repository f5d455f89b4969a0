"""Fixed-width bit packing of quantizer codes.

Code ``k`` occupies bits ``[k*b, (k+1)*b)`` of a little-endian bit stream:
bit ``p`` lives in byte ``p // 8`` at position ``p % 8``, least-significant
code bit first. Pad bits after ``m*b`` are always zero.
"""
from __future__ import annotations

import numpy as np

from .errors import PadBitsError, PackError


def packed_size(m: int, b: int) -> int:
    return (m * b + 7) // 8


def _check_bits(b: int) -> None:
    if not 1 <= b <= 16:
        raise PackError(f"bits per code must be in [1, 16], got {b}")


def pack(codes, b: int) -> bytes:
    """Pack a 1-D sequence of codes, each ``< 2**b``, into bytes."""
    codes = np.asarray(codes)
    if codes.ndim != 1:
        raise PackError("pack expects a 1-D sequence of codes")
    return pack_rows(codes[None, :], b)[0].tobytes()


def pack_rows(codes, b: int) -> np.ndarray:
    """Pack each row of an ``(n, m)`` code matrix; returns ``(n, ceil(m*b/8))`` uint8."""
    _check_bits(b)
    codes = np.asarray(codes)
    if codes.ndim != 2:
        raise PackError("pack_rows expects an (n, m) array")
    n, m = codes.shape
    if codes.size and (codes.min() < 0 or codes.max() >= 1 << b):
        raise PackError(f"code out of range for {b}-bit packing")
    codes = codes.astype(np.uint32)
    shifts = np.arange(b, dtype=np.uint32)
    bits = ((codes[:, :, None] >> shifts) & 1).astype(np.uint8).reshape(n, m * b)
    out = np.packbits(bits, axis=1, bitorder="little")
    if out.shape[1] != packed_size(m, b):
        # m*b == 0 never happens for m >= 1; keep shape honest for m == 0
        out = np.zeros((n, packed_size(m, b)), dtype=np.uint8)
    return out


def unpack(data, m: int, b: int, strict: bool = True) -> np.ndarray:
    """Inverse of :func:`pack`. Returns ``m`` codes as ``int64``."""
    arr = np.frombuffer(bytes(data), dtype=np.uint8)
    return unpack_rows(arr[None, :], m, b, strict=strict)[0]


def unpack_rows(data, m: int, b: int, strict: bool = True) -> np.ndarray:
    _check_bits(b)
    data = np.asarray(data, dtype=np.uint8)
    if data.ndim != 2 or data.shape[1] != packed_size(m, b):
        raise PackError(
            f"packed length {data.shape[-1]} does not match m={m}, b={b} "
            f"(expected {packed_size(m, b)})"
        )
    n = data.shape[0]
    bits = np.unpackbits(data, axis=1, bitorder="little")
    if strict and bits[:, m * b:].any():
        raise PadBitsError("nonzero pad bits in packed codes")
    bits = bits[:, : m * b].reshape(n, m, b).astype(np.int64)
    weights = np.int64(1) << np.arange(b, dtype=np.int64)
    return bits @ weights
