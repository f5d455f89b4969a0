"""
Score-preservation report
=========================

Synthetic stand-in for a labeled sentence-similarity corpus: three subsets
whose labels are noisy versions of the true cosine. The report compares
dense and sketch correlations with the labels.
"""

import json

import numpy as np

from sketchcodec import CodecConfig, LabeledPair, evaluate

rng = np.random.default_rng(3)
embeddings, pairs = {}, []
next_id = 0
for subset, noise in [("easy", 0.05), ("medium", 0.2), ("hard", 0.5)]:
    for _ in range(400):
        t = rng.uniform(-1, 1)
        u = rng.normal(size=384)
        u /= np.linalg.norm(u)
        w = rng.normal(size=384)
        w -= (w @ u) * u
        w /= np.linalg.norm(w)
        embeddings[next_id] = u
        embeddings[next_id + 1] = t * u + np.sqrt(1 - t * t) * w
        label = 2.5 * (t + 1) + rng.normal(scale=noise * 5)
        pairs.append(LabeledPair(subset, next_id, next_id + 1, label))
        next_id += 2

report = evaluate(CodecConfig(), embeddings, pairs)
print(json.dumps(report.to_dict()["macro"], indent=2))
for rep in report.per_subset:
    print(f"{rep.subset:7s} dense={rep.dense_spearman:.4f} sketch={rep.sketch_spearman:.4f} "
          f"loss={rep.spearman_loss:+.4f} sketch/dense={rep.sketch_dense_pearson:.4f}")

oracle = evaluate(CodecConfig(), embeddings, pairs, quantize=False)
print("float-sketch sketch/dense:", round(oracle.macro["sketch_dense_pearson"], 4))
