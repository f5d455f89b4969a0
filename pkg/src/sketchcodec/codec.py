"""Stateless embedding codec: sparse signed projection + scalar quantization.

Database vectors are normalized, projected to ``m`` dimensions, rescaled by
``sqrt(m)``, clipped to ``[-c, c]``, quantized to ``b`` bits per coordinate
and bit-packed. Queries are projected the same way but kept in floating
point; scores are asymmetric inner products in sketch space.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
import scipy.sparse

from . import bitpack
from .errors import ConfigError, DimensionMismatchError, UnencodableVectorError
from .hashing import MASK64, draw_table

NORM_LEVELS = 65535


class Metric(str, Enum):
    COSINE = "cosine"
    DOT = "dot"

    @property
    def code(self) -> int:
        return 0 if self is Metric.COSINE else 1

    @classmethod
    def from_code(cls, code: int) -> "Metric":
        if code == 0:
            return cls.COSINE
        if code == 1:
            return cls.DOT
        raise ConfigError("metric", f"unknown metric code {code}")


def _is_int(v) -> bool:
    return isinstance(v, (int, np.integer)) and not isinstance(v, bool)


def _finite_float(v) -> bool:
    try:
        return math.isfinite(float(v))
    except (TypeError, ValueError):
        return False


@dataclass(frozen=True)
class CodecConfig:
    """Sketch parameters. Validated on construction and immutable afterwards.

    The defaults are the 384-d sentence-embedding profile (48 bytes/vector).
    """

    d: int = 384
    m: int = 96
    b: int = 4
    s: int = 4
    c: float = 3.0
    metric: Metric = Metric.COSINE
    seed: int = 12345
    l_min: float = -32.0
    l_max: float = 32.0

    def __post_init__(self):
        if not (_is_int(self.d) and 1 <= self.d < 1 << 32):
            raise ConfigError("dim", f"input dimension out of range: {self.d!r}")
        if not (_is_int(self.m) and 1 <= self.m <= 1 << 16):
            raise ConfigError("sketch_dim", f"sketch dimension out of range: {self.m!r}")
        if not (_is_int(self.b) and 1 <= self.b <= 16):
            raise ConfigError("bits", f"bits out of range: {self.b!r} (need 1..16)")
        if not (_is_int(self.s) and 1 <= self.s < 1 << 32):
            raise ConfigError("sparsity", f"sparsity out of range: {self.s!r}")
        if not _finite_float(self.c) or float(self.c) <= 0:
            raise ConfigError("clip", f"clip range must be positive and finite: {self.c!r}")
        if not (_is_int(self.seed) and 0 <= self.seed <= MASK64):
            raise ConfigError("seed", f"seed must be a 64-bit unsigned integer: {self.seed!r}")
        if not (_finite_float(self.l_min) and _finite_float(self.l_max)):
            raise ConfigError("norm_range", "log-norm bounds must be finite")
        if not float(self.l_min) < float(self.l_max):
            raise ConfigError("norm_range", f"l_min must be < l_max, got {self.l_min}, {self.l_max}")
        try:
            metric = Metric(self.metric)
        except ValueError:
            raise ConfigError("metric", f"unknown metric {self.metric!r}") from None
        # normalize numeric types so equal configs compare equal
        for name, value in (("d", int(self.d)), ("m", int(self.m)), ("b", int(self.b)),
                            ("s", int(self.s)), ("seed", int(self.seed)),
                            ("c", float(self.c)), ("l_min", float(self.l_min)),
                            ("l_max", float(self.l_max)), ("metric", metric)):
            object.__setattr__(self, name, value)

    @property
    def levels(self) -> int:
        """Largest code value, ``2**b - 1``."""
        return (1 << self.b) - 1

    @property
    def step(self) -> float:
        return 2 * self.c / self.levels

    @property
    def packed_size(self) -> int:
        return bitpack.packed_size(self.m, self.b)

    @property
    def code_size_bytes(self) -> int:
        return code_size_bytes(self)

    @property
    def dense_bytes(self) -> int:
        return 4 * self.d

    @property
    def compression_ratio(self) -> float:
        return self.code_size_bytes / self.dense_bytes


def validate_config(**raw) -> CodecConfig:
    """Build a :class:`CodecConfig` from keyword parameters, defaults for the rest."""
    unknown = set(raw) - set(CodecConfig.__dataclass_fields__)
    if unknown:
        raise ConfigError("unknown", f"unknown config parameters: {sorted(unknown)}")
    return CodecConfig(**raw)


def code_size_bytes(config: CodecConfig) -> int:
    """Stored bytes per vector: ``ceil(m*b/8)``, plus 2 for the norm code in dot mode."""
    extra = 2 if config.metric is Metric.DOT else 0
    return bitpack.packed_size(config.m, config.b) + extra


# -- scalar quantizer -------------------------------------------------------

def quantize(config: CodecConfig, z):
    """Clip to ``[-c, c]`` and map to an integer code in ``[0, L]``.

    Rounds half-up via ``floor(x + 0.5)``. Works on scalars and arrays.
    """
    z = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("cannot quantize non-finite values")
    c, L = config.c, config.levels
    zc = np.clip(z, -c, c)
    q = np.floor(L * (zc + c) / (2 * c) + 0.5)
    q = np.clip(q, 0, L).astype(np.int64)
    return int(q) if q.ndim == 0 else q


def dequantize(config: CodecConfig, q):
    q = np.asarray(q)
    if np.any(q < 0) or np.any(q > config.levels):
        raise ValueError(f"code out of range [0, {config.levels}]")
    out = 2 * config.c * q.astype(np.float64) / config.levels - config.c
    return float(out) if out.ndim == 0 else out


# -- log-norm side channel --------------------------------------------------

def encode_norm(config: CodecConfig, norm):
    norm = np.asarray(norm, dtype=np.float64)
    if not np.all(np.isfinite(norm)) or np.any(norm <= 0):
        raise ValueError("norm must be positive and finite")
    lo, hi = config.l_min, config.l_max
    ell = np.clip(np.log2(norm), lo, hi)
    n = np.floor(NORM_LEVELS * (ell - lo) / (hi - lo) + 0.5)
    n = np.clip(n, 0, NORM_LEVELS).astype(np.int64)
    return int(n) if n.ndim == 0 else n


def decode_norm(config: CodecConfig, n):
    n = np.asarray(n)
    if np.any(n < 0) or np.any(n > NORM_LEVELS):
        raise ValueError("norm code must be a 16-bit unsigned integer")
    lo, hi = config.l_min, config.l_max
    out = np.exp2(lo + n.astype(np.float64) * (hi - lo) / NORM_LEVELS)
    return float(out) if out.ndim == 0 else out


# -- stored units -----------------------------------------------------------

@dataclass(frozen=True)
class EncodedVector:
    packed: bytes
    norm_code: Optional[int] = None

    def to_bytes(self) -> bytes:
        """Payload as written to sketch files: packed codes, then the norm code."""
        if self.norm_code is None:
            return self.packed
        return self.packed + struct.pack("<H", self.norm_code)


@dataclass(frozen=True)
class QuerySketch:
    sketch: np.ndarray = field(repr=False)
    query_norm: float


# -- codec ------------------------------------------------------------------

def _row_norms(X: np.ndarray) -> np.ndarray:
    # scaled to avoid overflow for large-magnitude finite inputs
    scale = np.max(np.abs(X), axis=1)
    safe = np.where(scale > 0, scale, 1.0)
    return scale * np.sqrt(np.sum((X / safe[:, None]) ** 2, axis=1))


class Codec:
    """Encoder/scorer bound to one :class:`CodecConfig`.

    Holds only the projection matrix derived from the config, so instances
    are safe to share across threads.
    """

    def __init__(self, config: Optional[CodecConfig] = None):
        self.config = config if config is not None else CodecConfig()
        self._projection = self._build_projection()

    def _build_projection(self) -> scipy.sparse.csr_matrix:
        cfg = self.config
        buckets, signs = draw_table(cfg.seed, cfg.d, cfg.s, cfg.m)
        cols = np.repeat(np.arange(cfg.d), cfg.s)
        R = scipy.sparse.coo_matrix(
            (signs.ravel().astype(np.float64), (buckets.ravel(), cols)),
            shape=(cfg.m, cfg.d),
        ).tocsr()  # sums repeated (bucket, coordinate) hits
        R.data /= math.sqrt(cfg.s)
        R.eliminate_zeros()
        R.sort_indices()
        return R

    @property
    def projection(self) -> scipy.sparse.csr_matrix:
        return self._projection

    # projection ------------------------------------------------------------

    def _as_rows(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.config.d:
            raise DimensionMismatchError(
                f"expected vectors of dimension {self.config.d}, got shape {X.shape}"
            )
        return X

    def project_rows(self, U) -> np.ndarray:
        """Apply the projection to each row of ``U``; returns ``(n, m)``."""
        U = self._as_rows(U)
        return np.ascontiguousarray((self._projection @ np.ascontiguousarray(U.T)).T)

    def project_unit(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=np.float64)
        if u.ndim != 1:
            raise DimensionMismatchError("project_unit expects a single vector")
        return self.project_rows(u)[0]

    def _directions(self, X):
        X = self._as_rows(X)
        if not np.all(np.isfinite(X)):
            bad = int(np.flatnonzero(~np.isfinite(X).all(axis=1))[0])
            raise UnencodableVectorError(f"vector {bad} has non-finite coordinates", )
        norms = _row_norms(X)
        bad = ~(np.isfinite(norms) & (norms > 0))
        if bad.any():
            raise UnencodableVectorError(f"vector {int(np.flatnonzero(bad)[0])} has zero norm")
        return X / norms[:, None], norms

    def sketch_rows(self, X):
        """Rescaled sketches ``sqrt(m) * R (x / |x|)`` and the input norms."""
        U, norms = self._directions(X)
        return math.sqrt(self.config.m) * self.project_rows(U), norms

    # database side ---------------------------------------------------------

    def encode_rows(self, X):
        """Encode every row of ``X``.

        Returns ``(packed, norm_codes, z)``: packed codes ``(n, ceil(m*b/8))``
        as uint8, norm codes ``(n,)`` or ``None`` in cosine mode, and the
        pre-clip sketches ``(n, m)`` for diagnostics.
        """
        z, norms = self.sketch_rows(X)
        packed = bitpack.pack_rows(quantize(self.config, z).reshape(z.shape), self.config.b)
        norm_codes = None
        if self.config.metric is Metric.DOT:
            norm_codes = np.atleast_1d(encode_norm(self.config, norms))
        return packed, norm_codes, z

    def encode_with_diagnostics(self, x):
        """Like :meth:`encode`, also returning the unclipped sketch ``z``."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1:
            raise DimensionMismatchError("encode expects a single vector")
        packed, norm_codes, z = self.encode_rows(x)
        n = None if norm_codes is None else int(norm_codes[0])
        return EncodedVector(packed[0].tobytes(), n), z[0]

    def encode(self, x) -> EncodedVector:
        return self.encode_with_diagnostics(x)[0]

    def encode_many(self, X) -> list:
        packed, norm_codes, _ = self.encode_rows(X)
        return [
            EncodedVector(p.tobytes(), None if norm_codes is None else int(norm_codes[i]))
            for i, p in enumerate(packed)
        ]

    def codes(self, e: EncodedVector) -> np.ndarray:
        return bitpack.unpack(e.packed, self.config.m, self.config.b)

    # query side ------------------------------------------------------------

    def encode_query(self, r) -> QuerySketch:
        r = np.asarray(r, dtype=np.float64)
        if r.ndim != 1:
            raise DimensionMismatchError("encode_query expects a single vector")
        a, norms = self.sketch_rows(r)
        return QuerySketch(a[0], float(norms[0]))

    # scoring ---------------------------------------------------------------

    def score_rows(self, sketches, query_norms, packed, norm_codes=None) -> np.ndarray:
        """Row-wise scores: query sketch ``i`` against packed codes ``i``.

        ``sketches`` may be a single ``(1, m)`` row, broadcast against all
        ``n`` packed rows. Every score path goes through here so batched and
        one-at-a-time results are bit-identical.
        """
        cfg = self.config
        codes = bitpack.unpack_rows(packed, cfg.m, cfg.b)
        zhat = dequantize(cfg, codes).reshape(codes.shape)
        cos = np.sum(zhat * sketches, axis=1) / cfg.m
        if cfg.metric is Metric.DOT:
            if norm_codes is None:
                raise ValueError("dot-mode scoring needs norm codes")
            return cos * query_norms * decode_norm(cfg, np.asarray(norm_codes))
        return cos

    def score_packed(self, q: QuerySketch, packed: np.ndarray, norm_codes=None) -> np.ndarray:
        """Scores of one query against an ``(n, nbytes)`` block of packed codes."""
        return self.score_rows(q.sketch[None, :], q.query_norm, packed, norm_codes)

    def score(self, q: QuerySketch, e: EncodedVector) -> float:
        """Asymmetric estimate: cosine in cosine mode, dot product in dot mode."""
        if (e.norm_code is None) != (self.config.metric is Metric.COSINE):
            raise ValueError("encoded vector does not match the codec metric")
        packed = np.frombuffer(e.packed, dtype=np.uint8)[None, :]
        norm_codes = None if e.norm_code is None else [e.norm_code]
        return float(self.score_packed(q, packed, norm_codes)[0])

    def score_unquantized(self, q: QuerySketch, z) -> float:
        """Float-sketch score ``(1/m) <a, z>`` with no clipping or quantization."""
        return float(np.dot(q.sketch, np.asarray(z, dtype=np.float64)) / self.config.m)
