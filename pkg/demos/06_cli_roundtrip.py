"""
Command-line workflow
=====================

Write an embedding file, encode it with the CLI, and query the sketch file.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from sketchcodec import formats

rng = np.random.default_rng(4)
corpus = rng.normal(size=(1000, 384)).astype(np.float32)

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    formats.write_embeddings(tmp / "corpus.chev", range(1000), corpus)
    formats.write_embeddings(tmp / "query.chev", [0], corpus[[42]])

    def cli(*args):
        proc = subprocess.run([sys.executable, "-m", "sketchcodec", *args],
                              capture_output=True, text=True, check=True)
        print("$ sketchcodec", " ".join(args))
        print(proc.stdout)

    cli("info")
    cli("encode", str(tmp / "corpus.chev"), str(tmp / "corpus.chsk"))
    cli("topk", str(tmp / "corpus.chsk"), "--query-file", str(tmp / "query.chev"), "--top-k", "3")
    print("sketch file size:", (tmp / "corpus.chsk").stat().st_size, "bytes")
