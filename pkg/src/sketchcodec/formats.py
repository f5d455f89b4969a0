"""Binary sketch/embedding files and the text pairs file.

All multi-byte fields are little-endian.

Sketch file (``CHSK``), 60-byte header::

    magic 4s | version u16 | metric u8 | b u8 | d u32 | m u32 | s u32
    | seed u64 | c f64 | l_min f64 | l_max f64 | count u64

followed by ``count`` records of ``id u64`` + payload (packed codes, then a
u16 norm code in dot mode).

Embedding file (``CHEV``), 18-byte header::

    magic 4s | version u16 | d u32 | count u64

followed by ``count`` records of ``id u64`` + ``d`` float32 values.

Pairs file: UTF-8 text, one ``subset<TAB>left_id<TAB>right_id<TAB>label``
per line; lines starting with ``#`` and blank lines are ignored.
"""
from __future__ import annotations

import math
import struct
from pathlib import Path

import numpy as np

from .codec import CodecConfig, Metric
from .errors import (
    BadMagicError,
    ConfigError,
    FormatError,
    PadBitsError,
    TruncatedFileError,
    UnsupportedVersionError,
)
from .evaluation import LabeledPair
from .index import FlatIndex
from . import bitpack

SKETCH_MAGIC = b"CHSK"
EMBED_MAGIC = b"CHEV"
VERSION = 1

SKETCH_HEADER = struct.Struct("<4sHBBIIIQdddQ")
EMBED_HEADER = struct.Struct("<4sHIQ")


def _check_magic(buf: bytes, magic: bytes, what: str) -> None:
    if len(buf) < 4 or buf[:4] != magic:
        raise BadMagicError(f"not a {what} file (bad magic {bytes(buf[:4])!r})")


# -- sketch files -----------------------------------------------------------

def sketch_header_bytes(config: CodecConfig, count: int) -> bytes:
    return SKETCH_HEADER.pack(
        SKETCH_MAGIC, VERSION, config.metric.code, config.b, config.d, config.m,
        config.s, config.seed, config.c, config.l_min, config.l_max, count,
    )


def sketch_bytes(index: FlatIndex) -> bytes:
    cfg = index.config
    n = len(index)
    ids = np.array(index.ids, dtype="<u8").reshape(n, 1).view(np.uint8)
    parts = [ids, index._packed]
    if cfg.metric is Metric.DOT:
        parts.append(index._norm_codes.astype("<u2").reshape(n, 1).view(np.uint8))
    body = np.concatenate(parts, axis=1) if n else np.zeros((0, 0), np.uint8)
    return sketch_header_bytes(cfg, n) + body.tobytes()


def write_sketch(path, index: FlatIndex) -> None:
    Path(path).write_bytes(sketch_bytes(index))


def parse_sketch(buf: bytes) -> FlatIndex:
    _check_magic(buf, SKETCH_MAGIC, "sketch")
    if len(buf) < SKETCH_HEADER.size:
        raise TruncatedFileError(f"sketch header truncated ({len(buf)} bytes)")
    (_, version, metric, b, d, m, s, seed, c, l_min, l_max,
     count) = SKETCH_HEADER.unpack_from(buf)
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported sketch file version {version}")
    try:
        config = CodecConfig(d=d, m=m, b=b, s=s, c=c, metric=Metric.from_code(metric),
                             seed=seed, l_min=l_min, l_max=l_max)
    except ConfigError as exc:
        raise FormatError(f"invalid config in sketch header: {exc}") from exc
    record = 8 + config.code_size_bytes
    expected = SKETCH_HEADER.size + count * record
    if len(buf) < expected:
        raise TruncatedFileError(
            f"sketch body truncated: expected {expected} bytes, got {len(buf)}"
        )
    if len(buf) > expected:
        raise FormatError(f"trailing bytes after {count} records")
    body = np.frombuffer(buf, dtype=np.uint8, offset=SKETCH_HEADER.size).reshape(count, record)
    ids = body[:, :8].copy().view("<u8").ravel()
    packed = np.ascontiguousarray(body[:, 8:8 + config.packed_size])
    try:
        bitpack.unpack_rows(packed, config.m, config.b, strict=True)
    except PadBitsError as exc:
        bad = int(np.flatnonzero(np.unpackbits(packed, axis=1, bitorder="little")
                                 [:, config.m * config.b:].any(axis=1))[0])
        raise PadBitsError(f"record {bad}: {exc}") from exc
    norm_codes = None
    if config.metric is Metric.DOT:
        norm_codes = body[:, 8 + config.packed_size:].copy().view("<u2").ravel().astype(np.int64)
    index = FlatIndex(config)
    if len(set(ids.tolist())) != count:
        raise FormatError("duplicate ids in sketch file")
    index._append([int(i) for i in ids], packed, norm_codes)
    return index


def read_sketch(path) -> FlatIndex:
    return parse_sketch(Path(path).read_bytes())


# -- embedding files --------------------------------------------------------

def embedding_bytes(ids, vectors) -> bytes:
    vectors = np.asarray(vectors, dtype="<f4")
    if vectors.ndim != 2:
        raise ValueError("vectors must be a 2-D array")
    n, d = vectors.shape
    ids = np.asarray(ids, dtype="<u8").reshape(n, 1)
    body = np.concatenate([ids.view(np.uint8), vectors.view(np.uint8)], axis=1)
    return EMBED_HEADER.pack(EMBED_MAGIC, VERSION, d, n) + body.tobytes()


def write_embeddings(path, ids, vectors) -> None:
    Path(path).write_bytes(embedding_bytes(ids, vectors))


def parse_embeddings(buf: bytes):
    """Returns ``(ids, vectors)``: uint64 ids and a float32 ``(count, d)`` array."""
    _check_magic(buf, EMBED_MAGIC, "embedding")
    if len(buf) < EMBED_HEADER.size:
        raise TruncatedFileError(f"embedding header truncated ({len(buf)} bytes)")
    _, version, d, count = EMBED_HEADER.unpack_from(buf)
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported embedding file version {version}")
    record = 8 + 4 * d
    expected = EMBED_HEADER.size + count * record
    if len(buf) != expected:
        have = (len(buf) - EMBED_HEADER.size) // record if record else 0
        raise TruncatedFileError(
            f"embedding file length {len(buf)} != expected {expected} "
            f"(record {have} incomplete at byte {EMBED_HEADER.size + have * record})"
        )
    body = np.frombuffer(buf, dtype=np.uint8, offset=EMBED_HEADER.size).reshape(count, record)
    ids = body[:, :8].copy().view("<u8").ravel()
    vectors = body[:, 8:].copy().view("<f4").reshape(count, d).astype(np.float32)
    if d == 0:
        vectors = np.zeros((count, 0), dtype=np.float32)
    return ids, vectors


def read_embeddings(path):
    return parse_embeddings(Path(path).read_bytes())


# -- pairs files ------------------------------------------------------------

def parse_pairs(text: str) -> list[LabeledPair]:
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise FormatError(f"line {lineno}: expected 4 tab-separated fields, got {len(fields)}")
        subset, left, right, label = fields
        try:
            left_id, right_id = int(left), int(right)
            value = float(label)
        except ValueError:
            raise FormatError(f"line {lineno}: cannot parse ids/label") from None
        if not (0 <= left_id < 1 << 64 and 0 <= right_id < 1 << 64):
            raise FormatError(f"line {lineno}: id out of 64-bit unsigned range")
        if not math.isfinite(value):
            raise FormatError(f"line {lineno}: label is not finite")
        pairs.append(LabeledPair(subset, left_id, right_id, value))
    return pairs


def read_pairs(path) -> list[LabeledPair]:
    return parse_pairs(Path(path).read_text(encoding="utf-8"))


def write_pairs(path, pairs) -> None:
    lines = [f"{p.subset}\t{p.left_id}\t{p.right_id}\t{p.label!r}" for p in pairs]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
