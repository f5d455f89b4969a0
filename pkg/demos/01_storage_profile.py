"""
Storage profile of a configuration
==================================

How many bytes one stored vector costs for a few sketch settings.
"""

from sketchcodec import CodecConfig

# The default profile: 384-d inputs, 96 sketch coordinates at 4 bits each.
cfg = CodecConfig()
print(f"default: {cfg.code_size_bytes} bytes vs {cfg.dense_bytes} dense "
      f"(ratio {cfg.compression_ratio})")

# Dot-product mode adds a two-byte log-norm code.
print("dot mode:", CodecConfig(metric="dot").code_size_bytes, "bytes")

# A few other trade-offs.
for m, b in [(64, 4), (128, 4), (96, 2), (96, 8), (192, 3)]:
    c = CodecConfig(m=m, b=b)
    print(f"m={m:4d} b={b:2d}: {c.code_size_bytes:4d} bytes  ratio {c.compression_ratio:.5f}")
