"""Command-line front end: ``info``, ``encode``, ``topk`` and ``eval``.

Exit status: 0 success, 2 usage, 3 invalid configuration, 4 malformed or
corrupt file, 5 bad data (unencodable vector, dimension mismatch, missing
id), 1 anything else.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import formats
from .codec import Codec, CodecConfig, Metric
from .errors import (
    ConfigError,
    DimensionMismatchError,
    FormatError,
    SketchError,
    UnencodableVectorError,
)
from .evaluation import evaluate
from .index import FlatIndex

USAGE_EXIT = 2


def _config_flags(p: argparse.ArgumentParser, dim_default=384) -> None:
    g = p.add_argument_group("codec configuration")
    g.add_argument("--dim", type=int, default=dim_default, help="input dimension d")
    g.add_argument("--sketch-dim", type=int, default=96, help="sketch dimension m")
    g.add_argument("--bits", type=int, default=4, help="bits per sketch coordinate b")
    g.add_argument("--sparsity", type=int, default=4, help="hash repetitions per coordinate s")
    g.add_argument("--clip", type=float, default=3.0, help="symmetric clip range c")
    g.add_argument("--metric", choices=[m.value for m in Metric], default="cosine")
    g.add_argument("--seed", type=int, default=12345)
    g.add_argument("--lmin", type=float, default=-32.0, help="log2-norm lower bound (dot mode)")
    g.add_argument("--lmax", type=float, default=32.0, help="log2-norm upper bound (dot mode)")


def _config(args, d=None) -> CodecConfig:
    return CodecConfig(
        d=args.dim if d is None else d, m=args.sketch_dim, b=args.bits, s=args.sparsity,
        c=args.clip, metric=args.metric, seed=args.seed, l_min=args.lmin, l_max=args.lmax,
    )


def _storage_line(cfg: CodecConfig) -> str:
    return f"{cfg.code_size_bytes} bytes/vector, {cfg.compression_ratio:.6g} of dense"


def cmd_info(args, out) -> int:
    cfg = _config(args)
    for key, value in (("d", cfg.d), ("m", cfg.m), ("b", cfg.b), ("s", cfg.s), ("c", cfg.c),
                       ("metric", cfg.metric.value), ("seed", cfg.seed),
                       ("l_min", cfg.l_min), ("l_max", cfg.l_max),
                       ("dense_bytes", cfg.dense_bytes)):
        print(f"{key}: {value}", file=out)
    print(_storage_line(cfg), file=out)
    return 0


def cmd_encode(args, out) -> int:
    ids, vectors = formats.read_embeddings(args.input)
    d = vectors.shape[1]
    if args.dim is not None and args.dim != d:
        raise ConfigError("dim", f"--dim {args.dim} does not match input dimension {d}")
    cfg = _config(args, d=d)
    index = FlatIndex(cfg)
    if len(ids):
        X = vectors.astype(np.float64)
        with np.errstate(over="ignore", invalid="ignore"):
            bad = ~np.isfinite(X).all(axis=1) | ~(np.abs(X).max(axis=1) > 0)
        if bad.any():
            raise UnencodableVectorError(f"vector id {int(ids[np.flatnonzero(bad)[0]])} is not encodable "
                                         "(non-finite or zero norm)")
        index.add_many(ids.tolist(), X)
    formats.write_sketch(args.output, index)
    print(f"encoded {len(index)} vectors to {args.output}", file=out)
    print(_storage_line(cfg), file=out)
    return 0


def _queries(args, d):
    if args.query is not None:
        try:
            values = [float(v) for v in args.query.replace(",", " ").split()]
        except ValueError:
            raise FormatError("--query must be a comma-separated list of numbers") from None
        return [None], np.array([values])
    ids, vectors = formats.read_embeddings(args.query_file)
    return ids.tolist(), vectors.astype(np.float64)


def cmd_topk(args, out) -> int:
    index = formats.read_sketch(args.sketch)
    qids, Q = _queries(args, index.config.d)
    if Q.shape[1] != index.config.d:
        raise DimensionMismatchError(
            f"query dimension {Q.shape[1]} does not match sketch dimension {index.config.d}"
        )
    for qid, r in zip(qids, Q):
        if len(qids) > 1:
            print(f"# query {qid}", file=out)
        for rank, hit in enumerate(index.topk(r, args.top_k), start=1):
            print(f"{rank} {hit.id} {hit.score:.6f}", file=out)
    return 0


def cmd_eval(args, out) -> int:
    ids, vectors = formats.read_embeddings(args.embeddings)
    pairs = formats.read_pairs(args.pairs)
    cfg = _config(args, d=vectors.shape[1] if args.dim is None else args.dim)
    embeddings = dict(zip(ids.tolist(), vectors))
    report = evaluate(Codec(cfg), embeddings, pairs)
    text = json.dumps(report.to_dict(), indent=2)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        for rep in report.per_subset:
            stats = "undefined" if not rep.defined else (
                f"dense={rep.dense_spearman:.4f} sketch={rep.sketch_spearman:.4f} "
                f"loss={rep.spearman_loss:+.4f} sketch/dense={rep.sketch_dense_pearson:.4f}")
            print(f"{rep.subset}\t{rep.n_pairs}\t{stats}", file=out)
        m = report.macro
        if m["subsets"]:
            print(f"macro\t{m['pairs']}\tdense={m['dense_spearman']:.4f} "
                  f"sketch={m['sketch_spearman']:.4f} loss={m['spearman_loss']:+.4f} "
                  f"sketch/dense={m['sketch_dense_pearson']:.4f}", file=out)
    else:
        print(text, file=out)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sketchcodec",
        description="Compress embeddings into bit-packed sketches and score queries against them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("info", help="print the storage profile of a configuration")
    _config_flags(p)
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("encode", help="encode an embedding file into a sketch file")
    p.add_argument("input")
    p.add_argument("output")
    _config_flags(p, dim_default=None)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("topk", help="exact top-k scan of a sketch file")
    p.add_argument("sketch")
    q = p.add_mutually_exclusive_group(required=True)
    q.add_argument("--query", help="inline query values, comma separated")
    q.add_argument("--query-file", help="embedding file of queries")
    p.add_argument("--top-k", type=int, default=10)
    p.set_defaults(func=cmd_topk)

    p = sub.add_parser("eval", help="score-preservation report over labeled pairs")
    p.add_argument("embeddings")
    p.add_argument("pairs")
    p.add_argument("--report", help="write the JSON report here instead of stdout")
    _config_flags(p, dim_default=None)
    p.set_defaults(func=cmd_eval)
    return parser


_CATEGORY = {3: "config", 4: "format", 5: "data", 1: "error"}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "topk" and args.top_k < 1:
        parser.error("--top-k must be >= 1")
    try:
        return args.func(args, out)
    except SketchError as exc:
        code, message = exc.exit_code, str(exc)
    except KeyError as exc:
        code, message = 5, str(exc.args[0] if exc.args else exc)
    except OSError as exc:
        code, message = 1, str(exc)
    print(f"error [{_CATEGORY.get(code, 'error')}]: {message}", file=sys.stderr)
    return code

if __name__ == "__main__":
    sys.exit(main())
