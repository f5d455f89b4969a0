"""
Exact top-k over compressed vectors
===================================

The flat index scans every stored sketch. Here noisy copies of stored
vectors are used as queries, and we check how often the original comes back
first.
"""

import numpy as np

from sketchcodec import FlatIndex

rng = np.random.default_rng(1)
n, d = 5000, 384
corpus = rng.normal(size=(n, d))

index = FlatIndex()
index.add_many(range(n), corpus)
print(f"{len(index)} vectors, {index.config.code_size_bytes * n / 1024:.0f} KiB of codes")

found = 0
for target in rng.integers(0, n, size=100):
    query = corpus[target] + 0.5 * rng.normal(size=d)
    hits = index.topk(query, 5)
    found += hits[0].id == target
print(f"original ranked first for {found}/100 noisy queries")

for hit in index.topk(corpus[7], 3):
    print(hit)
