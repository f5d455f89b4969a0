"""
Encoding and asymmetric scoring
===============================

Database vectors are stored as packed codes; queries stay in floating point.
The score estimates the cosine between query and stored vector.
"""

import numpy as np

from sketchcodec import Codec

rng = np.random.default_rng(0)
codec = Codec()

# Build a pair of vectors with a known cosine of 0.6.
u = rng.normal(size=384)
u /= np.linalg.norm(u)
w = rng.normal(size=384)
w -= (w @ u) * u
w /= np.linalg.norm(w)
x = 0.6 * u + 0.8 * w

encoded = codec.encode(x)
print("stored bytes:", len(encoded.packed))
print("first codes:", codec.codes(encoded)[:12])

query = codec.encode_query(u)
print(f"exact cosine 0.6000, sketch estimate {codec.score(query, encoded):.4f}")

# The float sketch (no clipping, no quantization) shows how much of the
# error comes from the projection itself.
_, z = codec.encode_with_diagnostics(x)
print(f"float-sketch estimate {codec.score_unquantized(query, z):.4f}")

# Over many pairs the estimate tracks the true cosine closely.
cos = rng.uniform(-1, 1, size=500)
errs = []
for t in cos:
    w = rng.normal(size=384)
    w -= (w @ u) * u
    w /= np.linalg.norm(w)
    errs.append(codec.score(query, codec.encode(t * u + np.sqrt(1 - t * t) * w)) - t)
print(f"mean error {np.mean(errs):+.4f}, std {np.std(errs):.4f}")
