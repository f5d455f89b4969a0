"""Exit criteria. Each test prints one PASS/FAIL line (run with ``-s`` to see them)."""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from sketchcodec import (
    Codec,
    CodecConfig,
    FlatIndex,
    ScoredHit,
    code_size_bytes,
    decode_norm,
    dequantize,
    encode_norm,
    evaluate,
    pack,
    quantize,
    unpack,
)
from sketchcodec import formats
from sketchcodec.evaluation import LabeledPair, summarize
from oracles import planted_pairs, ref_pack


def verdict(number, title, ok, detail, elapsed, budget):
    ok = bool(ok) and elapsed < budget
    status = "PASS" if ok else "FAIL"
    print(f"\n[{status}] criterion {number:2d} {title}: {detail} ({elapsed:.2f}s / {budget}s)")
    assert ok, f"criterion {number} failed: {detail}, {elapsed:.2f}s"


def test_01_storage_exactness():
    t0 = time.perf_counter()
    cos, dot = CodecConfig(), CodecConfig(metric="dot")
    e = Codec(cos).encode(np.random.default_rng(0).normal(size=384))
    ratio = code_size_bytes(cos) / (384 * 4)
    ok = (code_size_bytes(cos) == 48 and len(e.to_bytes()) == 48 and ratio == 0.03125
          and code_size_bytes(dot) == 50)
    verdict(1, "storage exactness", ok,
            f"cosine={code_size_bytes(cos)}B ratio={ratio} dot={code_size_bytes(dot)}B",
            time.perf_counter() - t0, 1)


def test_02_quantizer_bound():
    t0 = time.perf_counter()
    z = np.concatenate([np.linspace(-3, 3, 10**5), [-3.0, 3.0]])
    worst = {}
    ok = True
    for b in (1, 2, 4, 8):
        cfg = CodecConfig(b=b, c=3.0)
        err = np.abs(dequantize(cfg, quantize(cfg, z)) - z)
        worst[b] = float(err.max())
        ok &= bool(np.all(err <= cfg.step / 2 + 1e-12))
    detail = " ".join(f"b={b}:max={w:.4g}<=step/2={CodecConfig(b=b).step / 2:.4g}"
                      for b, w in worst.items())
    verdict(2, "quantizer bound", ok, detail, time.perf_counter() - t0, 5)


def test_03_unbiasedness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    u, v = rng.normal(size=(2, 64))
    u /= np.linalg.norm(u)
    v /= np.linalg.norm(v)
    truth = float(u @ v)
    estimates = []
    for seed in range(2000):
        codec = Codec(CodecConfig(d=64, m=16, s=2, seed=seed))
        Ru, Rv = codec.project_rows(np.stack([u, v]))
        estimates.append(Ru @ Rv)
    estimates = np.array(estimates)
    se = estimates.std(ddof=1) / math.sqrt(len(estimates))
    z = abs(estimates.mean() - truth) / se
    verdict(3, "unbiasedness", z <= 4,
            f"<u,v>={truth:.4f} mean={estimates.mean():.4f} se={se:.4f} |z|={z:.2f}",
            time.perf_counter() - t0, 30)


def test_04_per_instance_error_bound():
    t0 = time.perf_counter()
    cfg = CodecConfig()
    codec = Codec(cfg)
    rng = np.random.default_rng(4)
    R, X = rng.normal(size=(2, 500, 384))
    violations, worst = 0, 0.0
    for r, x in zip(R, X):
        e, z = codec.encode_with_diagnostics(x)
        q = codec.encode_query(r)
        a = q.sketch
        err = abs(codec.score(q, e) - codec.score_unquantized(q, z))
        bound = (np.sum(np.abs(a)) * cfg.step / 2
                 + np.sum(np.abs(a) * np.abs(z - np.clip(z, -cfg.c, cfg.c)))) / cfg.m
        violations += err > bound
        worst = max(worst, err / bound)
    verdict(4, "per-instance score bound", violations == 0,
            f"violations={violations}/500 max err/bound={worst:.3f}", time.perf_counter() - t0, 10)


def test_05_correlation_preservation():
    t0 = time.perf_counter()
    codec = Codec()
    rng = np.random.default_rng(5)
    r, x, cos = planted_pairs(rng, 2000, 384)
    packed, _, z = codec.encode_rows(x)
    a, norms = codec.sketch_rows(r)
    quant = codec.score_rows(a, norms, packed)
    oracle = np.sum(a * z, axis=1) / codec.config.m
    p_quant = np.corrcoef(quant, cos)[0, 1]
    p_oracle = np.corrcoef(oracle, cos)[0, 1]
    selfs = rng.normal(size=(1000, 384))
    sp, _, _ = codec.encode_rows(selfs)
    sa, sn = codec.sketch_rows(selfs)
    self_scores = codec.score_rows(sa, sn, sp)
    mean_self = float(self_scores.mean())
    ok = abs(p_quant - p_oracle) <= 0.01 and 0.97 <= mean_self <= 1.03
    verdict(5, "correlation preservation", ok,
            f"pearson quant={p_quant:.4f} oracle={p_oracle:.4f} "
            f"|diff|={abs(p_quant - p_oracle):.4f} mean self-score={mean_self:.4f}",
            time.perf_counter() - t0, 60)


def test_06_bitpack_roundtrip():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    bad = 0
    for _ in range(10**4):
        b = int(rng.integers(1, 17))
        m = int(rng.integers(1, 200))
        codes = rng.integers(0, 2**b, size=m)
        data = pack(codes, b)
        bad += len(data) != (m * b + 7) // 8 or not np.array_equal(unpack(data, m, b), codes)
    golden = (pack([0x1, 0x2], 4) == bytes([0x21])
              and pack([1, 0, 0, 0, 0, 0, 0, 0, 1], 1) == bytes([0x01, 0x01])
              and pack([7, 7, 7], 3) == bytes([0xFF, 0x01]) == ref_pack([7, 7, 7], 3))
    verdict(6, "bit-pack roundtrip", bad == 0 and golden,
            f"mismatches={bad}/10000 golden={golden}", time.perf_counter() - t0, 5)


def _brute_force(codec, ids, X, r, k):
    q = codec.encode_query(r)
    scored = sorted(((codec.score(q, codec.encode(x)), i) for i, x in zip(ids, X)),
                    key=lambda t: (-t[0], t[1]))
    return [ScoredHit(i, s) for s, i in scored[:k]]


def test_07_flat_index_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    mismatches = 0
    for trial in range(100):
        metric = "dot" if trial % 4 == 3 else "cosine"
        codec = Codec(CodecConfig(d=32, m=24, metric=metric, seed=trial))
        n = int(rng.integers(1, 501))
        X = rng.normal(size=(n, 32))
        dup = rng.integers(0, n, size=n // 5)  # exact duplicates force score ties
        X[rng.integers(0, n, size=dup.size)] = X[dup]
        ids = rng.permutation(10 * n)[:n].tolist()
        index = FlatIndex(codec=codec)
        index.add_many(ids, X)
        r = rng.normal(size=32)
        k = int(rng.integers(1, n + 10))
        mismatches += index.topk(r, k) != _brute_force(codec, ids, X, r, k)
    verdict(7, "flat-index oracle equivalence", mismatches == 0,
            f"mismatching corpora={mismatches}/100", time.perf_counter() - t0, 30)


def test_08_norm_channel():
    t0 = time.perf_counter()
    cfg = CodecConfig(metric="dot")
    rng = np.random.default_rng(8)
    norms = 2.0 ** rng.uniform(-30, 30, size=10**5)
    rel = np.abs(decode_norm(cfg, encode_norm(cfg, norms)) / norms - 1)
    bound = 2 ** ((cfg.l_max - cfg.l_min) / (2 * 65535)) - 1
    codec = Codec(cfg)
    x, r = rng.normal(size=(2, 384))
    e = codec.encode(x)
    base = codec.score(codec.encode_query(r), e)
    lin = max(abs(codec.score(codec.encode_query(al * r), e) / (al * base) - 1)
              for al in (1e-3, 0.25, 2.0, 17.0, 1e3))
    ok = rel.max() <= bound and lin <= 1e-9
    verdict(8, "dot-mode norm channel", ok,
            f"max rel err={rel.max():.3e} bound={bound:.3e} linearity dev={lin:.1e}",
            time.perf_counter() - t0, 10)


def test_09_determinism_and_file_roundtrip(tmp_path):
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    X = rng.normal(size=(300, 384)).astype(np.float32)
    src = tmp_path / "corpus.chev"
    formats.write_embeddings(src, range(300), X)
    files = []
    for name in ("a.chsk", "b.chsk"):
        subprocess.run([sys.executable, "-m", "sketchcodec", "encode", str(src),
                        str(tmp_path / name)], check=True, capture_output=True)
        files.append((tmp_path / name).read_bytes())
    in_memory = FlatIndex()
    in_memory.add_many(range(300), X)
    saved = tmp_path / "c.chsk"
    formats.write_sketch(saved, in_memory)
    loaded = formats.read_sketch(saved)
    queries = rng.normal(size=(10, 384))
    same_topk = all(loaded.topk(q, 20) == in_memory.topk(q, 20) for q in queries)
    ok = files[0] == files[1] == saved.read_bytes() and same_topk
    verdict(9, "determinism and file roundtrip", ok,
            f"identical files={files[0] == files[1]} topk identical={same_topk}",
            time.perf_counter() - t0, 10)


def test_10_evaluation_sanity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    embeddings, pairs, nid = {}, [], 0
    for s in range(4):
        r, x, cos = planted_pairs(rng, 100, 384)
        for k in range(100):
            embeddings[nid], embeddings[nid + 1] = r[k], x[k]
            dense = float(r[k] @ x[k] / np.linalg.norm(r[k]) / np.linalg.norm(x[k]))
            pairs.append(LabeledPair(f"lang{s}", nid, nid + 1, dense))
            nid += 2
    report = evaluate(CodecConfig(), embeddings, pairs)
    dense_ok = abs(report.macro["dense_spearman"] - 1.0) <= 1e-12
    per_subset, _, _ = summarize([p.subset for p in pairs], [p.label for p in pairs],
                                 report.dense_scores, report.dense_scores)
    inj_ok = all(abs(rep.sketch_dense_pearson - 1.0) <= 1e-12 and rep.spearman_loss == 0
                 for rep in per_subset)
    verdict(10, "evaluation harness sanity", dense_ok and inj_ok,
            f"macro dense_spearman={report.macro['dense_spearman']:.15f} injection ok={inj_ok}",
            time.perf_counter() - t0, 10)


def _encode_seconds(cfg, n=200, repeats=7):
    codec = Codec(cfg)
    X = np.random.default_rng(11).normal(size=(n, cfg.d))
    best = math.inf
    for _ in range(repeats):
        t = time.perf_counter()
        for x in X:
            codec.encode(x)
        best = min(best, time.perf_counter() - t)
    return best / n


def test_11_encode_scaling():
    t0 = time.perf_counter()
    ratios = {
        "d 384->768": _encode_seconds(CodecConfig(d=768)) / _encode_seconds(CodecConfig(d=384)),
        "d 16384->32768": (_encode_seconds(CodecConfig(d=32768), n=50)
                           / _encode_seconds(CodecConfig(d=16384), n=50)),
        "s 4->8": _encode_seconds(CodecConfig(s=8)) / _encode_seconds(CodecConfig(s=4)),
        "s 64->128": (_encode_seconds(CodecConfig(s=128), n=50)
                      / _encode_seconds(CodecConfig(s=64), n=50)),
    }
    ok = all(v <= 2.5 for v in ratios.values())
    verdict(11, "encode complexity smoke", ok,
            " ".join(f"{k}:{v:.2f}x" for k, v in ratios.items()), time.perf_counter() - t0, 60)
