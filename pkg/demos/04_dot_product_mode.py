"""
Dot-product mode
================

With ``metric="dot"`` each vector also stores its log2 norm in 16 bits, so
scores estimate the raw inner product rather than the cosine.
"""

import numpy as np

from sketchcodec import Codec, CodecConfig, decode_norm

rng = np.random.default_rng(2)
cfg = CodecConfig(metric="dot")
codec = Codec(cfg)

x = rng.normal(size=384) * 4.0
r = x + rng.normal(size=384) * 2.0
e = codec.encode(x)
print("stored bytes:", len(e.to_bytes()))
print(f"norm {np.linalg.norm(x):.5f} decoded as {decode_norm(cfg, e.norm_code):.5f}")
print(f"exact dot {x @ r:.2f}, estimate {codec.score(codec.encode_query(r), e):.2f}")

# The score is linear in the query magnitude.
for alpha in (0.5, 1.0, 2.0):
    print(alpha, round(codec.score(codec.encode_query(alpha * r), e), 4))
