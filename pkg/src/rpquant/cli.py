"""``rpquant`` command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data or validation error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import csvio, datagen_eval, hardness, rptree
from .errors import RpquantError, StageError


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _emit_json(obj, out=None):
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_table(header, rows, fmt, out=None):
    if fmt == "json":
        _emit_json([dict(zip(header, r)) for r in rows], out)
        return
    text = ",".join(header) + "\n" + csvio.format_rows(rows)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _tree_params(args) -> rptree.TreeParams:
    return rptree.TreeParams(
        c=args.c, min_size=args.min_size, max_levels=args.max_levels,
        shared_per_level=args.shared_per_level, seed=args.seed, threshold=args.threshold,
        n_jobs=args.threads,
    )


def cmd_build(args):
    X = csvio.read_points(args.input, args.header)
    tree = rptree.make_tree(X, _tree_params(args))
    data = rptree.serialize(tree)
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.write(data.decode())


def cmd_encode(args):
    tree = rptree.load_tree(args.tree)
    X = csvio.read_points(args.input, args.header)
    codes = rptree.route_many(tree, X)
    _emit_table(["leaf"], [[int(c)] for c in codes], args.format, args.out)


def eval_summary(tree: rptree.RpTree, X: np.ndarray) -> dict:
    out = {
        "quantization_error": rptree.quantization_error(tree, X),
        "n_points": int(X.shape[0]),
        "n_leaves": tree.n_leaves,
        "depth": tree.depth,
    }
    if tree.params.retain_stats and tree.n_leaves > 1:
        checks = rptree.split_quality_report(tree)
        dist = [ch for ch in checks if ch.distance_bound_ok is not None]
        proj = [ch.relative_decrease for ch in checks if ch.outcome.split_kind == "projection"]
        out["split_report"] = {
            "splits": len(checks),
            "projection_splits": len(proj),
            "distance_splits": sum(ch.outcome.split_kind == "distance" for ch in checks),
            "decrease_identity_ok": all(ch.decrease_ok for ch in checks),
            "distance_bound_checked": len(dist),
            "distance_bound_ok": all(ch.distance_bound_ok for ch in dist),
            "median_relative_decrease": float(np.median(proj)) if proj else None,
        }
    return out


def cmd_eval(args):
    tree = rptree.load_tree(args.tree)
    X = csvio.read_points(args.input, args.header)
    summary = eval_summary(tree, X)
    if args.format == "json":
        _emit_json(summary)
    else:
        flat = {k: v for k, v in summary.items() if k != "split_report"}
        flat.update({f"split_report.{k}": v for k, v in summary.get("split_report", {}).items()})
        _emit_table(["key", "value"], [[k, v] for k, v in flat.items()], "csv")


def cmd_gen(args):
    spec = datagen_eval.ManifoldSpec(args.kind, args.d, args.D, args.n, args.noise, args.seed)
    X = datagen_eval.generate(spec)
    if args.out:
        csvio.write_points(args.out, X)
    else:
        sys.stdout.write(csvio.format_rows(X.tolist()))


def cmd_curve(args):
    X = csvio.read_points(args.input, args.header)
    params = rptree.TreeParams(c=args.c, min_size=args.min_size, threshold=args.threshold)
    curve = datagen_eval.error_vs_k(X, args.levels, args.trees, params, seed=args.seed)
    if args.format == "json":
        _emit_json({"points": [list(p) for p in curve.points], "slope": curve.slope_estimate}, args.out)
    else:
        _emit_table(["k", "error"], [list(p) for p in curve.points], "csv", args.out)
        print(f"slope: {curve.slope_estimate!r}", file=sys.stderr)


def cmd_kmeans(args):
    X = csvio.read_points(args.input, args.header)
    res = datagen_eval.lloyd_kmeans(X, args.k, args.iters, rng=args.seed)
    if args.out:
        csvio.write_points(args.out, res.centers)
    _emit_json({"cost": res.cost, "iterations": res.iterations, "history": list(res.history)})


def cmd_reduce(args):
    text = Path(args.cnf).read_text()
    res = hardness.end_to_end_reduce(text, verify=args.verify, input_kind=args.input_kind)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "phi_prime.cnf").write_text(res.phi_prime.to_dimacs())
    (out / "phi_nae.cnf").write_text(res.phi_double_prime.to_dimacs())
    csvio.write_points(out / "distance.csv", res.distance.entries)
    csvio.write_points(out / "embedding.csv", res.embedding.points)
    report = res.report()
    _emit_json(report, out / "report.json")
    _emit_json(report)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--header", action="store_true", help="input CSV has a header row")

    p = _Parser(prog="rpquant", description="Random projection tree quantization toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def tree_flags(sp, with_levels=True):
        sp.add_argument("--c", type=float, default=10.0)
        sp.add_argument("--min-size", type=int, default=10)
        if with_levels:
            sp.add_argument("--max-levels", type=int, default=None)
        sp.add_argument("--threshold", choices=("median", "mean"), default="median")

    sp = sub.add_parser("build", parents=[common], help="build an RP tree")
    sp.add_argument("--input", required=True)
    tree_flags(sp)
    sp.add_argument("--shared-per-level", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_build)

    sp = sub.add_parser("encode", parents=[common], help="route points to leaf ids")
    sp.add_argument("--tree", required=True)
    sp.add_argument("--input", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_encode)

    sp = sub.add_parser("eval", parents=[common], help="quantization error and split report")
    sp.add_argument("--tree", required=True)
    sp.add_argument("--input", required=True)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("gen", parents=[common], help="generate synthetic manifold data")
    sp.add_argument("--kind", required=True, choices=("subspace", "linear-subspace", "d-sphere", "swiss-roll"))
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--D", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--noise", type=float, default=0.0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("curve", parents=[common], help="error vs codebook size")
    sp.add_argument("--input", required=True)
    sp.add_argument("--levels", type=int, required=True)
    sp.add_argument("--trees", type=int, default=8)
    tree_flags(sp, with_levels=False)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_curve)

    sp = sub.add_parser("kmeans", parents=[common], help="Lloyd's k-means baseline")
    sp.add_argument("--input", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--iters", type=int, default=100)
    sp.add_argument("--out", help="write centers CSV")
    sp.set_defaults(func=cmd_kmeans)

    sp = sub.add_parser("reduce", parents=[common], help="3SAT to 2-means reduction")
    sp.add_argument("--cnf", required=True)
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--verify", action="store_true")
    sp.add_argument("--input-kind", choices=("3sat", "2-3cnf"), default="3sat")
    sp.set_defaults(func=cmd_reduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:      # --help
        return int(exc.code or 0)
    config = {k: v for k, v in vars(args).items() if k != "func"}
    print("config: " + json.dumps(config, sort_keys=True), file=sys.stderr)
    try:
        args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RpquantError as exc:
        print(f"error: [{args.command}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: [{args.command}] {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
