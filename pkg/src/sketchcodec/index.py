"""Exact linear-scan index over encoded vectors."""
from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np

from .codec import Codec, CodecConfig, EncodedVector, Metric


class ScoredHit(NamedTuple):
    id: int
    score: float


class FlatIndex:
    """Append-only list of ``(id, EncodedVector)`` scanned exactly in sketch space.

    Only the packed codes (and norm codes in dot mode) are kept; original
    vectors are discarded after encoding. Not an approximate nearest-neighbor
    structure: every query scores every entry.

    Concurrent :meth:`topk` calls are safe; :meth:`add` must not overlap with
    readers or other writers.
    """

    def __init__(self, config: Optional[CodecConfig] = None, codec: Optional[Codec] = None):
        if codec is None:
            codec = Codec(config)
        elif config is not None and config != codec.config:
            raise ValueError("codec and config disagree")
        self.codec = codec
        self.config = codec.config
        self._ids: list[int] = []
        self._id_set: set[int] = set()
        self._packed = np.zeros((0, self.config.packed_size), dtype=np.uint8)
        self._norm_codes = np.zeros(0, dtype=np.int64)

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def ids(self) -> list[int]:
        return list(self._ids)

    def _check_id(self, id_) -> int:
        id_ = int(id_)
        if not 0 <= id_ < 1 << 64:
            raise ValueError(f"id must be a 64-bit unsigned integer: {id_}")
        if id_ in self._id_set:
            raise KeyError(f"duplicate id {id_}")
        return id_

    def add(self, id_, x) -> None:
        id_ = self._check_id(id_)
        self.add_encoded(id_, self.codec.encode(x))

    def add_many(self, ids, X) -> None:
        """Encode and append a batch. Nothing is appended if any row fails."""
        ids = [int(i) for i in ids]
        if len(set(ids)) != len(ids):
            raise KeyError("duplicate ids in batch")
        for i in ids:
            self._check_id(i)
        packed, norm_codes, _ = self.codec.encode_rows(X)
        if len(ids) != packed.shape[0]:
            raise ValueError("ids and vectors differ in length")
        self._append(ids, packed, norm_codes)

    def add_encoded(self, id_, e: EncodedVector) -> None:
        id_ = self._check_id(id_)
        if len(e.packed) != self.config.packed_size:
            raise ValueError("encoded vector has the wrong packed length")
        if (e.norm_code is None) != (self.config.metric is Metric.COSINE):
            raise ValueError("encoded vector does not match the index metric")
        packed = np.frombuffer(e.packed, dtype=np.uint8)[None, :]
        norm_codes = None if e.norm_code is None else np.array([e.norm_code])
        self._append([id_], packed, norm_codes)

    def _append(self, ids, packed, norm_codes) -> None:
        self._packed = np.concatenate([self._packed, packed])
        if norm_codes is not None:
            self._norm_codes = np.concatenate([self._norm_codes, np.asarray(norm_codes, dtype=np.int64)])
        self._ids.extend(ids)
        self._id_set.update(ids)

    def entry(self, pos: int) -> tuple[int, EncodedVector]:
        norm = int(self._norm_codes[pos]) if self.config.metric is Metric.DOT else None
        return self._ids[pos], EncodedVector(self._packed[pos].tobytes(), norm)

    def entries(self):
        for pos in range(len(self)):
            yield self.entry(pos)

    def _score_block(self, query, packed, norm_codes) -> np.ndarray:
        return self.codec.score_packed(query, packed, norm_codes)

    def scores(self, r) -> np.ndarray:
        """Sketch score of query ``r`` against every entry, in insertion order."""
        query = self.codec.encode_query(r)
        norms = self._norm_codes if self.config.metric is Metric.DOT else None
        return self._score_block(query, self._packed, norms)

    def topk(self, r, k: int) -> list[ScoredHit]:
        """Best ``min(k, len(self))`` hits, score descending, ties by ascending id."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if not len(self):
            self.codec.encode_query(r)  # still reject bad queries
            return []
        scores = self.scores(r)
        ids = np.array(self._ids, dtype=np.uint64)
        order = np.lexsort((ids, -scores))[:k]
        return [ScoredHit(int(ids[p]), float(scores[p])) for p in order]
