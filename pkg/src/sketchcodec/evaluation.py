"""Offline score-preservation harness over precomputed embeddings.

For each labeled pair the harness computes the exact dense score and the
sketch score (left element = float query, right element = quantized
database vector), then per subset: dense and sketch Spearman against the
labels, their difference, and the Pearson correlation between sketch and
dense scores. Subset statistics are macro-averaged without weights.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import rankdata

from .codec import Codec, Metric
from .errors import UndefinedCorrelationError

STAT_KEYS = ("dense_spearman", "sketch_spearman", "spearman_loss", "sketch_dense_pearson")


@dataclass(frozen=True)
class LabeledPair:
    subset: str
    left_id: int
    right_id: int
    label: float


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("pearson expects two 1-D arrays of equal length")
    if x.size < 2:
        raise UndefinedCorrelationError("need at least 2 points for a correlation")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = np.dot(xc, xc)
    syy = np.dot(yc, yc)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelationError("undefined correlation: zero variance")
    r = np.dot(xc, yc) / math.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, r)))


def ranks(x) -> np.ndarray:
    """1-based fractional ranks; ties share the average of their positions."""
    return rankdata(np.asarray(x, dtype=np.float64), method="average")


def spearman(x, y) -> float:
    return pearson(ranks(x), ranks(y))


@dataclass
class SubsetReport:
    subset: str
    n_pairs: int
    dense_spearman: Optional[float] = None
    sketch_spearman: Optional[float] = None
    spearman_loss: Optional[float] = None
    sketch_dense_pearson: Optional[float] = None

    @property
    def defined(self) -> bool:
        return self.sketch_dense_pearson is not None


@dataclass
class EvalReport:
    per_subset: list
    macro: dict
    warnings: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)
    config: Optional[dict] = None
    quantized: bool = True
    dense_scores: Optional[np.ndarray] = field(default=None, repr=False)
    sketch_scores: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self, include_timing: bool = True) -> dict:
        out = {
            "config": self.config,
            "quantized": self.quantized,
            "subsets": [
                {"subset": r.subset, "pairs": r.n_pairs, **{k: getattr(r, k) for k in STAT_KEYS}}
                for r in self.per_subset
            ],
            "macro": dict(self.macro),
            "excluded_subsets": [r.subset for r in self.per_subset if not r.defined],
            "warnings": list(self.warnings),
        }
        if include_timing:
            out["timing"] = dict(self.timing)
        return out


def subset_report(subset: str, labels, dense, sketch) -> SubsetReport:
    """The four statistics for one subset; raises if any is undefined."""
    dense_sp = spearman(dense, labels)
    sketch_sp = spearman(sketch, labels)
    return SubsetReport(
        subset=subset,
        n_pairs=len(labels),
        dense_spearman=dense_sp,
        sketch_spearman=sketch_sp,
        spearman_loss=sketch_sp - dense_sp,
        sketch_dense_pearson=pearson(sketch, dense),
    )


def summarize(subsets, labels, dense, sketch):
    """Per-subset reports, macro means and warnings from per-pair scores.

    Subsets whose statistics are undefined are kept in the per-subset list
    with empty statistics and left out of the macro average.
    """
    subsets = list(subsets)
    labels = np.asarray(labels, dtype=np.float64)
    dense = np.asarray(dense, dtype=np.float64)
    sketch = np.asarray(sketch, dtype=np.float64)
    order = list(dict.fromkeys(subsets))
    tags = np.array(subsets, dtype=object)
    per_subset, warnings = [], []
    for name in order:
        sel = tags == name
        try:
            rep = subset_report(name, labels[sel], dense[sel], sketch[sel])
        except UndefinedCorrelationError as exc:
            rep = SubsetReport(name, int(sel.sum()))
            warnings.append(f"subset {name!r} excluded from macro: {exc}")
        per_subset.append(rep)
    good = [r for r in per_subset if r.defined]
    macro = {"subsets": len(good), "pairs": sum(r.n_pairs for r in good)}
    for key in STAT_KEYS:
        macro[key] = float(np.mean([getattr(r, key) for r in good])) if good else None
    return per_subset, macro, warnings


def _lookup(embeddings, ids):
    try:
        return np.stack([np.asarray(embeddings[i], dtype=np.float64) for i in ids])
    except KeyError as exc:
        raise KeyError(f"missing embedding for id {exc.args[0]}") from None


def evaluate(config, embeddings, pairs, quantize: bool = True) -> EvalReport:
    """Run the harness.

    ``config`` is a :class:`CodecConfig` or :class:`Codec`; ``embeddings``
    maps id to vector. With ``quantize=False`` sketch scores are the
    unclipped float-sketch inner products, the reference the quantized
    codec is compared against. In dot mode the dense reference is the exact
    dot product instead of cosine.
    """
    codec = config if isinstance(config, Codec) else Codec(config)
    cfg = codec.config
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no pairs to evaluate")
    left_ids = list(dict.fromkeys(p.left_id for p in pairs))
    right_ids = list(dict.fromkeys(p.right_id for p in pairs))
    left_pos = {i: k for k, i in enumerate(left_ids)}
    right_pos = {i: k for k, i in enumerate(right_ids)}
    L = _lookup(embeddings, left_ids)
    R = _lookup(embeddings, right_ids)
    li = np.array([left_pos[p.left_id] for p in pairs])
    ri = np.array([right_pos[p.right_id] for p in pairs])

    t0 = time.perf_counter()
    packed, norm_codes, z = codec.encode_rows(R)
    t1 = time.perf_counter()
    a, query_norms = codec.sketch_rows(L)
    if quantize:
        nc = None if norm_codes is None else norm_codes[ri]
        sketch = codec.score_rows(a[li], query_norms[li], packed[ri], nc)
    else:
        sketch = np.sum(a[li] * z[ri], axis=1) / cfg.m
    t2 = time.perf_counter()

    Lp, Rp = L[li], R[ri]
    dots = np.sum(Lp * Rp, axis=1)
    if cfg.metric is Metric.DOT:
        dense = dots
        if not quantize:
            dense_norms = np.linalg.norm(Lp, axis=1) * np.linalg.norm(Rp, axis=1)
            sketch = sketch * dense_norms
    else:
        dense = dots / (np.linalg.norm(Lp, axis=1) * np.linalg.norm(Rp, axis=1))

    per_subset, macro, warnings = summarize(
        [p.subset for p in pairs], [p.label for p in pairs], dense, sketch
    )
    cfg_dict = asdict(cfg)
    cfg_dict["metric"] = cfg.metric.value
    return EvalReport(
        per_subset=per_subset,
        macro=macro,
        warnings=warnings,
        timing={"quantize_seconds": t1 - t0, "score_seconds": t2 - t1},
        config=cfg_dict,
        quantized=quantize,
        dense_scores=dense,
        sketch_scores=sketch,
    )
