"""Command-line entry points: dataset generation, trace replay, serving."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from .approx_engine import ScoreParams
from .exact_engine import AggregateRequest
from .ingest import scan_init
from .tile_index import IndexConfig, initialize
from .workload import (
    DISTRIBUTIONS,
    ReplayMode,
    TraceParams,
    gen_dataset,
    gen_trace,
    replay,
)


def _parse_int_list(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p.strip() != ""]


def _add_dataset_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--file", required=True, help="CSV file to index")
    p.add_argument("--axes", default="0,1", help="axis column indices, e.g. 0,1")
    p.add_argument("--tracked", default="2", help="tracked column indices, e.g. 2,3")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--no-header", action="store_true", help="file has no header line")
    p.add_argument("--on-bad-row", choices=["fail", "skip"], default="fail")
    p.add_argument("--grid", type=int, default=32, help="initial grid resolution g")
    p.add_argument("--split-factor", type=int, default=2)
    p.add_argument("--max-depth", type=int, default=8)
    p.add_argument("--min-split-count", type=int, default=256)


def _descriptor_args(args) -> dict:
    axes = _parse_int_list(args.axes)
    if len(axes) != 2:
        raise SystemExit("--axes must list exactly two column indices")
    return dict(
        axis_x=axes[0],
        axis_y=axes[1],
        tracked_attributes=_parse_int_list(args.tracked),
        delimiter=args.delimiter,
        has_header=not args.no_header,
        on_bad_row=args.on_bad_row,
    )


def _index_config(args) -> IndexConfig:
    return IndexConfig(
        initial_grid=args.grid,
        split_factor=args.split_factor,
        max_depth=args.max_depth,
        min_split_count=args.min_split_count,
    )


def cmd_gen_data(args) -> int:
    gen_dataset(
        seed=args.seed,
        rows=args.rows,
        numeric_cols=args.cols,
        distribution=args.dist,
        out_path=args.out,
    )
    print(f"wrote {args.rows} rows x {args.cols} cols to {args.out}")
    return 0


def cmd_replay(args) -> int:
    if args.mode == "approx" and args.phi is None:
        raise SystemExit("--phi is required with --mode approx")
    desc_args = _descriptor_args(args)
    config = _index_config(args)

    descriptor, scan = scan_init(args.file, **desc_args)
    index = initialize(descriptor, scan, config)
    requests = tuple(
        AggregateRequest(args.agg, a if args.agg != "count" else None)
        for a in (descriptor.tracked_attributes[:1] or [None])
    )
    params = TraceParams(
        n_queries=args.queries,
        target_count=args.target,
        requests=requests,
        phi=args.phi,
    )
    trace = gen_trace(descriptor, index, args.seed, params)
    del index, scan

    mode = ReplayMode(args.mode, args.phi if args.mode == "approx" else None)
    report = replay(
        args.file, desc_args, config, trace, mode,
        with_oracle=not args.no_oracle,
        score_params=ScoreParams(alpha=args.alpha),
    )
    base = Path(args.report)
    csv_path = report.to_csv(base.with_suffix(".csv"))
    json_path = report.to_json(base.with_suffix(".json"))
    print(f"replayed {len(trace.queries)} queries in {mode.kind} mode "
          f"(rows read {report.total_rows_read}, tiles split {report.total_tiles_split})")
    print(f"report: {csv_path} {json_path}")

    if args.verify:
        bad = 0
        for row in report.rows:
            if row.actual_error is None or row.reported_bound is None:
                continue
            if row.actual_error > max(row.reported_bound, 1e-12):
                bad += 1
                print(f"VIOLATION q{row.query_idx} {row.agg}: "
                      f"actual {row.actual_error} > bound {row.reported_bound}", file=sys.stderr)
            if mode.kind == "approx" and mode.phi is not None and row.reported_bound > mode.phi:
                bad += 1
                print(f"VIOLATION q{row.query_idx} {row.agg}: "
                      f"bound {row.reported_bound} > phi {mode.phi}", file=sys.stderr)
        if bad:
            print(f"verify: {bad} violations", file=sys.stderr)
            return 1
        print("verify: all errors within reported bounds")
    return 0


def cmd_serve(args) -> int:
    from .service import build_session, run_server

    desc_args = _descriptor_args(args)
    session = build_session(
        args.file,
        desc_args["axis_x"],
        desc_args["axis_y"],
        desc_args["tracked_attributes"],
        delimiter=desc_args["delimiter"],
        has_header=desc_args["has_header"],
        on_bad_row=desc_args["on_bad_row"],
        config=_index_config(args),
        queue_mutations=not args.no_queue,
    )
    port = args.port if args.port is not None else int(os.environ.get("TILEPROBE_PORT", "8000"))
    static = Path(args.static) if args.static else None
    print(f"serving {args.file} on port {port}")
    run_server(session, port, static_dir=static, host=args.host)
    return 0


def cmd_plot(args) -> int:
    """Merge replay reports into gnuplot-ready columns, one line per query."""
    series = []
    for path in args.reports:
        per_query: dict[int, tuple[int, int]] = {}
        with open(path) as f:
            for row in csv.DictReader(f):
                qi = int(row["query_idx"])
                if qi not in per_query:
                    per_query[qi] = (int(row["rows_read"]), int(row["elapsed_us"]))
        series.append((Path(path).stem, per_query))
    n = max(len(s[1]) for s in series)
    out = sys.stdout if args.out is None else open(args.out, "w")
    try:
        header = "# query_idx " + " ".join(f"{name}.rows_read {name}.elapsed_us" for name, _ in series)
        print(header, file=out)
        for qi in range(n):
            cells = [str(qi)]
            for _, per_query in series:
                rows_read, elapsed = per_query.get(qi, ("-", "-"))
                cells.append(str(rows_read))
                cells.append(str(elapsed))
            print(" ".join(cells), file=out)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tileprobe", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic CSV dataset")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, default=10, help="total numeric columns (>= 3)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dist", choices=list(DISTRIBUTIONS), default="uniform")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("replay", help="generate a shifted-window trace and replay it")
    _add_dataset_flags(p)
    p.add_argument("--mode", choices=["exact", "approx"], default="exact")
    p.add_argument("--phi", type=_nonnegative_float, default=None, help="accuracy constraint for approx mode")
    p.add_argument("--queries", type=int, default=50)
    p.add_argument("--target", type=int, default=10_000, help="objects per window, approximately")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--agg", choices=["count", "sum", "mean", "min", "max"], default="mean")
    p.add_argument("--alpha", type=float, default=1.0, help="tile score trade-off")
    p.add_argument("--report", required=True, help="report path prefix (.csv/.json appended)")
    p.add_argument("--verify", action="store_true", help="check actual errors against reported bounds")
    p.add_argument("--no-oracle", action="store_true", help="skip ground-truth columns")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="serve the HTTP API over one dataset")
    _add_dataset_flags(p)
    p.add_argument("--port", type=int, default=None, help="default: $TILEPROBE_PORT or 8000")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static", default=None, help="directory with the built UI bundle")
    p.add_argument("--no-queue", action="store_true", help="409 on concurrent mutating queries instead of queueing")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("plot", help="emit gnuplot-ready columns from replay reports")
    p.add_argument("--reports", nargs="+", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_plot)

    return parser


def _nonnegative_float(text: str) -> float:
    v = float(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
