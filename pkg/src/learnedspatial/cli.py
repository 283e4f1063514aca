"""``lsbench``: build indexes, run and verify workloads, tune and compare.

Exit codes: 0 success, 1 usage or configuration error, 2 ingestion
error, 3 verification mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from typing import Sequence

from . import bench
from .index import BuildConfig, ConfigError, TECHNIQUES, build
from .oracle import BruteForce
from .polygon import read_polygons
from .search import SEARCH_KINDS
from .workload import (
    DISTRIBUTIONS,
    QUERY_TYPES,
    IngestionError,
    SpecError,
    SyntheticSpec,
    WorkloadSpec,
    gen_synthetic,
    gen_workload,
    load_points,
    read_workload,
    save_points,
    write_workload,
)

EXIT_OK, EXIT_USAGE, EXIT_INGEST, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _str_list(choices):
    def parse(text: str) -> list[str]:
        vals = [v.strip() for v in text.split(",") if v.strip()]
        bad = [v for v in vals if v not in choices]
        if bad or not vals:
            raise argparse.ArgumentTypeError(f"expected values from {choices}, got {text!r}")
        return vals
    return parse


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    g = shared.add_argument_group("index")
    g.add_argument("--index", choices=TECHNIQUES, default="fixed", help="partitioning technique")
    g.add_argument("--search", choices=SEARCH_KINDS, default="spline", help="within-partition search")
    g.add_argument("--leaf-size", type=int, default=1024, help="partition size l")
    g.add_argument("--spline-error", type=int, default=32, help="spline max error")
    g.add_argument("--hilbert-order", type=int, default=16, help="Hilbert curve order")
    w = shared.add_argument_group("workload")
    w.add_argument("--query-type", choices=QUERY_TYPES, default="range")
    w.add_argument("--selectivity", type=float, default=1e-5)
    w.add_argument("--distribution", choices=DISTRIBUTIONS, default="skewed")
    w.add_argument("--queries", type=int, default=1000)
    w.add_argument("--seed", type=int, default=0)
    io_ = shared.add_argument_group("files")
    io_.add_argument("--data", help="points CSV (lat,lon) or a saved index file; build and query "
                     "use an index file's stored configuration")
    io_.add_argument("--polygons", help="polygon file for join queries")
    io_.add_argument("--workload", help="workload file (overrides generation)")
    io_.add_argument("--out", help="output path (default: stdout)")
    io_.add_argument("--verify", action="store_true", help="check every result against a brute-force scan")
    io_.add_argument("--plot-data", action="store_true", help="add per-phase mean columns")

    p = _Parser(prog="lsbench", description="Learned spatial index benchmark")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("build", parents=[shared], help="build an index and print its summary")
    sub.add_parser("query", parents=[shared], help="run a workload against one configuration")
    t = sub.add_parser("tune", parents=[shared], help="sweep leaf sizes and pick the fastest")
    t.add_argument("--sweep", type=_int_list, default=list(bench.DEFAULT_SWEEP))
    c = sub.add_parser("compare", parents=[shared], help="tuned techniques x search models")
    c.add_argument("--sweep", type=_int_list, default=list(bench.DEFAULT_SWEEP))
    c.add_argument("--techniques", type=_str_list(TECHNIQUES), default=list(TECHNIQUES))
    c.add_argument("--searches", type=_str_list(SEARCH_KINDS), default=list(SEARCH_KINDS))
    gen = sub.add_parser("gen", parents=[shared], help="generate a synthetic dataset, or a workload with --data")
    gen.add_argument("--n", type=int, default=100_000, help="synthetic point count")
    gen.add_argument("--clusters", type=int, default=5, help="mixture components; 0 for uniform")
    gen.add_argument("--spread", type=float, default=1.0, help="cluster std in degrees")
    return p


def _config(args) -> BuildConfig:
    """The stored configuration when ``--data`` is an index file, else the flags."""
    cfg = getattr(args, "stored_config", None)
    if cfg is None:
        cfg = BuildConfig(args.index, args.leaf_size, args.search, args.spline_error, args.hilbert_order)
    cfg.validate()
    return cfg


def _load_data(args):
    if not args.data:
        raise UsageError("--data is required")
    if bench.is_index_file(args.data):
        try:
            args.stored_config, pts = bench.read_index_file(args.data)
        except ValueError as exc:
            raise IngestionError(str(exc)) from exc
    else:
        pts = load_points(args.data)
    if len(pts) == 0:
        raise IngestionError(f"{args.data}: empty dataset")
    return pts


def _workload(args, data) -> tuple[str, list]:
    if args.workload:
        return read_workload(args.workload)
    if args.query_type == "join" and args.polygons:
        try:
            return "join", read_polygons(args.polygons, strict=False)
        except OSError as exc:
            raise IngestionError(f"{args.polygons}: {exc.strerror}") from exc
    spec = WorkloadSpec(args.query_type, args.selectivity, args.distribution, args.queries, args.seed)
    return args.query_type, gen_workload(data, spec)


def _labels(args) -> dict:
    """Report columns describing the workload; blank when it came from a file."""
    from_file = args.workload or (args.query_type == "join" and args.polygons)
    if from_file:
        return {"selectivity": float("nan"), "distribution": ""}
    return {"selectivity": args.selectivity, "distribution": args.distribution}


def _emit(args, rows: Sequence[dict]) -> None:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _expected(args, data, qtype, queries):
    if not args.verify:
        return None
    return bench.oracle_results(BruteForce(data), qtype, queries)


def cmd_build(args) -> int:
    data = _load_data(args)
    cfg = _config(args)
    idx = build(data, cfg)
    summary = idx.summary()
    if args.out:
        summary["file_bytes"] = bench.save_index(args.out, idx)
        summary["file"] = args.out
    w = csv.DictWriter(sys.stdout, fieldnames=list(summary.keys()), lineterminator="\n")
    w.writeheader()
    w.writerow(summary)
    return EXIT_OK


def cmd_query(args) -> int:
    data = _load_data(args)
    cfg = _config(args)
    qtype, queries = _workload(args, data)
    expected = _expected(args, data, qtype, queries)
    row = bench.bench(data, cfg, qtype, queries, expected=expected, **_labels(args))
    _emit(args, [row.as_dict(args.plot_data)])
    return EXIT_OK


def cmd_tune(args) -> int:
    data = _load_data(args)
    qtype, queries = _workload(args, data)
    expected = _expected(args, data, qtype, queries)
    base = {"max_error": args.spline_error, "hilbert_order": args.hilbert_order}
    for l in args.sweep:
        BuildConfig(args.index, l, args.search, **base).validate()
    rows, best = bench.tune(data, args.index, args.search, args.sweep, qtype, queries, config=base,
                            expected=expected, **_labels(args))
    _emit(args, [dict(r.as_dict(args.plot_data), best=r.leaf_size == best) for r in rows])
    print(f"best leaf size: {best}", file=sys.stderr)
    return EXIT_OK


def cmd_compare(args) -> int:
    data = _load_data(args)
    qtype, queries = _workload(args, data)
    expected = _expected(args, data, qtype, queries)
    base = {"max_error": args.spline_error, "hilbert_order": args.hilbert_order}
    rows, ratios = bench.compare(data, args.techniques, args.searches, args.sweep, qtype, queries, config=base,
                                 expected=expected, **_labels(args))
    out = []
    for r in rows:
        d = r.as_dict(args.plot_data)
        d["bs_over_ml"] = round(ratios[r.technique], 4) if r.technique in ratios else ""
        out.append(d)
    _emit(args, out)
    return EXIT_OK


def cmd_gen(args) -> int:
    if not args.out:
        raise UsageError("--out is required for gen")
    if args.data:
        data = _load_data(args)
        spec = WorkloadSpec(args.query_type, args.selectivity, args.distribution, args.queries, args.seed)
        write_workload(args.out, args.query_type, gen_workload(data, spec))
    else:
        spec = SyntheticSpec(n=args.n, clusters=args.clusters, spread=args.spread, seed=args.seed)
        save_points(args.out, gen_synthetic(spec))
    return EXIT_OK


COMMANDS = {"build": cmd_build, "query": cmd_query, "tune": cmd_tune, "compare": cmd_compare, "gen": cmd_gen}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, SpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IngestionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except bench.VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
