"""Synthetic datasets, exploration traces, and trace replay with reports.

Traces mimic map-style exploration: a window sized to hit a target object
count, then repeatedly shifted by a random 10-20% of its size in one of the
eight compass directions. Replays run a trace through either engine on a
freshly built index and record per-query telemetry; ground truth comes from
the independent oracle scanner, never from the engines.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .approx_engine import ScoreParams, evaluate_approx
from .errors import TargetUnreachable
from .exact_engine import AggregateRequest, evaluate_exact
from .ingest import DatasetDescriptor, RowReader, scan_init
from .oracle import OracleScanner
from .tile_index import IndexConfig, Rect, TileIndex, initialize

REPORT_COLUMNS = [
    "query_idx", "mode", "phi", "elapsed_us", "rows_read", "tiles_split",
    "agg", "value", "ci_lo", "ci_hi", "reported_bound", "oracle", "actual_error",
]

DISTRIBUTIONS = ("uniform", "gaussian", "zipf-clustered")


def gen_dataset(
    seed: int,
    rows: int,
    numeric_cols: int,
    distribution: str,
    out_path,
    *,
    axis_range: tuple[float, float] = (0.0, 1000.0),
    value_range: tuple[float, float] = (0.0, 1000.0),
    gauss_mean: float = 500.0,
    gauss_sd: float = 100.0,
    zipf_clusters: int = 8,
    zipf_exponent: float = 1.5,
    cluster_sd: float = 20.0,
    quantize_bits: int = 10,
) -> Path:
    """Write a deterministic-by-seed CSV with two uniform axis columns and
    numeric_cols - 2 value columns drawn from the chosen distribution.

    Values are quantized to multiples of 2**-quantize_bits so that sums of
    any subset are exactly representable in float64; with ten fractional
    bits, "%.10f" prints them losslessly and parsing reads them back exactly.
    """
    if numeric_cols < 3:
        raise ValueError("need at least 3 numeric columns (two axes + one value)")
    if distribution not in DISTRIBUTIONS:
        raise ValueError(f"distribution must be one of {DISTRIBUTIONS}")
    rng = np.random.default_rng(seed)
    n_vals = numeric_cols - 2
    out_path = Path(out_path)

    axes = rng.uniform(axis_range[0], axis_range[1], size=(rows, 2))
    if distribution == "uniform":
        vals = rng.uniform(value_range[0], value_range[1], size=(rows, n_vals))
    elif distribution == "gaussian":
        vals = rng.normal(gauss_mean, gauss_sd, size=(rows, n_vals))
    else:
        vals = np.empty((rows, n_vals))
        weights = 1.0 / np.arange(1, zipf_clusters + 1) ** zipf_exponent
        weights /= weights.sum()
        for j in range(n_vals):
            centers = rng.uniform(value_range[0], value_range[1], size=zipf_clusters)
            members = rng.choice(zipf_clusters, size=rows, p=weights)
            vals[:, j] = np.clip(
                centers[members] + rng.normal(0.0, cluster_sd, size=rows),
                value_range[0], value_range[1],
            )
    if quantize_bits > 0:
        scale = float(1 << quantize_bits)
        axes = np.round(axes * scale) / scale
        vals = np.round(vals * scale) / scale

    names = ["x", "y"] + [f"a{j}" for j in range(n_vals)]
    data = np.hstack([axes, vals]) if rows else np.empty((0, numeric_cols))
    with open(out_path, "w", newline="") as f:
        f.write(",".join(names) + "\n")
        chunk = 65536
        for lo in range(0, rows, chunk):
            block = data[lo:lo + chunk]
            f.write("\n".join(",".join("%.10f" % v for v in row) for row in block))
            f.write("\n")
    return out_path


@dataclass
class TraceParams:
    n_queries: int = 50
    shift_min_frac: float = 0.1
    shift_max_frac: float = 0.2
    target_count: int = 10_000
    requests: tuple[AggregateRequest, ...] = ()
    phi: Optional[float] = None


@dataclass
class TraceQuery:
    rect: Rect
    requests: tuple[AggregateRequest, ...]
    phi: Optional[float]


@dataclass
class ExplorationTrace:
    queries: list[TraceQuery]
    seed: int
    params: TraceParams


_DIRECTIONS = [(-1, 0), (1, 0), (0, -1), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1)]


def _clamped_window(domain: Rect, cx: float, cy: float, w: float, h: float) -> Rect:
    x0 = min(max(cx - w / 2.0, domain.x_min), domain.x_max - w) if w <= domain.x_max - domain.x_min else domain.x_min
    y0 = min(max(cy - h / 2.0, domain.y_min), domain.y_max - h) if h <= domain.y_max - domain.y_min else domain.y_min
    x1 = min(x0 + w, domain.x_max)
    y1 = min(y0 + h, domain.y_max)
    return Rect(x0, x1, y0, y1)


def gen_trace(descriptor: DatasetDescriptor, index: TileIndex, seed: int, params: TraceParams) -> ExplorationTrace:
    """Shifted-window exploration path. The first window is sized by binary
    search on its side length until the index-counted objects inside land
    within 20% of target_count; no file access is involved."""
    if params.target_count > descriptor.row_count:
        raise TargetUnreachable(
            f"target {params.target_count} exceeds row count {descriptor.row_count}"
        )
    rng = np.random.default_rng(seed)
    domain = index.domain
    dw = domain.x_max - domain.x_min
    dh = domain.y_max - domain.y_min
    cx = rng.uniform(domain.x_min, domain.x_max)
    cy = rng.uniform(domain.y_min, domain.y_max)

    lo_f, hi_f = 0.0, 1.0
    best = None
    for _ in range(60):
        f = (lo_f + hi_f) / 2.0
        rect = _clamped_window(domain, cx, cy, f * dw, f * dh)
        n = index.window_count(rect)
        if best is None or abs(n - params.target_count) < abs(best[1] - params.target_count):
            best = (rect, n)
        if n < params.target_count:
            lo_f = f
        else:
            hi_f = f
        if 0.8 * params.target_count <= n <= 1.2 * params.target_count:
            best = (rect, n)
            break
    rect = best[0]
    w = rect.x_max - rect.x_min
    h = rect.y_max - rect.y_min

    queries = [TraceQuery(rect, tuple(params.requests), params.phi)]
    for _ in range(params.n_queries - 1):
        dx_sign, dy_sign = _DIRECTIONS[int(rng.integers(len(_DIRECTIONS)))]
        ux = rng.uniform(params.shift_min_frac, params.shift_max_frac)
        uy = rng.uniform(params.shift_min_frac, params.shift_max_frac)
        cx = (rect.x_min + rect.x_max) / 2.0 + dx_sign * ux * w
        cy = (rect.y_min + rect.y_max) / 2.0 + dy_sign * uy * h
        rect = _clamped_window(domain, cx, cy, w, h)
        queries.append(TraceQuery(rect, tuple(params.requests), params.phi))
    return ExplorationTrace(queries, seed, params)


@dataclass(frozen=True)
class ReplayMode:
    kind: str                  # "exact" or "approx"
    phi: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("exact", "approx"):
            raise ValueError(f"unknown replay mode {self.kind!r}")

    def label(self) -> str:
        return self.kind


@dataclass
class ReportRow:
    query_idx: int
    mode: str
    phi: Optional[float]
    elapsed_us: int
    rows_read: int
    tiles_split: int
    agg: str
    value: Optional[float]
    ci_lo: Optional[float]
    ci_hi: Optional[float]
    reported_bound: Optional[float]
    oracle: Optional[float]
    actual_error: Optional[float]


@dataclass
class ReplayReport:
    mode: ReplayMode
    rows: list[ReportRow] = field(default_factory=list)
    rows_read_seq: list[int] = field(default_factory=list)
    tiles_split_seq: list[int] = field(default_factory=list)
    elapsed_us_seq: list[int] = field(default_factory=list)
    index: Optional[TileIndex] = None  # final index state, for audits; never serialized

    @property
    def total_rows_read(self) -> int:
        return sum(self.rows_read_seq)

    @property
    def total_tiles_split(self) -> int:
        return sum(self.tiles_split_seq)

    def summary(self) -> dict:
        return {
            "mode": self.mode.kind,
            "phi": self.mode.phi,
            "queries": len(self.rows_read_seq),
            "total_rows_read": self.total_rows_read,
            "total_tiles_split": self.total_tiles_split,
            "total_elapsed_us": sum(self.elapsed_us_seq),
            "rows_read": self.rows_read_seq,
            "tiles_split": self.tiles_split_seq,
        }

    def to_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(REPORT_COLUMNS)
            for r in self.rows:
                writer.writerow([
                    r.query_idx, r.mode,
                    "" if r.phi is None else repr(r.phi),
                    r.elapsed_us, r.rows_read, r.tiles_split, r.agg,
                    _num(r.value), _num(r.ci_lo), _num(r.ci_hi),
                    _num(r.reported_bound), _num(r.oracle), _num(r.actual_error),
                ])
        return path

    def to_json(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.summary(), indent=2) + "\n")
        return path


def _num(v: Optional[float]) -> str:
    return "" if v is None else repr(float(v))


def _agg_label(descriptor: DatasetDescriptor, r: AggregateRequest) -> str:
    if r.attribute is None:
        return r.function
    return f"{r.function}({descriptor.column_names[r.attribute]})"


def relative_error(value: Optional[float], truth: Optional[float], epsilon: float = 1e-12) -> Optional[float]:
    if value is None and truth is None:
        return 0.0
    if value is None or truth is None:
        return None
    return abs(value - truth) / max(abs(value), epsilon)


def replay(
    file_path,
    descriptor_args: dict,
    config: IndexConfig,
    trace: ExplorationTrace,
    mode: ReplayMode,
    *,
    with_oracle: bool = True,
    score_params: Optional[ScoreParams] = None,
) -> ReplayReport:
    """Run the trace in order against a freshly built index.

    descriptor_args are the scan_init keyword arguments (axis_x, axis_y,
    tracked_attributes, delimiter, has_header, on_bad_row). Oracle values
    and actual errors are filled in after the timed run, from a single
    independent scan of the file.
    """
    descriptor, scan = scan_init(file_path, **descriptor_args)
    index = initialize(descriptor, scan, config)
    reader = RowReader(descriptor)
    report = ReplayReport(mode, index=index)

    answers = []
    for query in trace.queries:
        phi = mode.phi if mode.kind == "approx" else None
        if mode.kind == "exact":
            ans = evaluate_exact(index, query.rect, query.requests, reader)
            per_request = [(v, v, v, 0.0) for v in ans.values]
        else:
            ap = evaluate_approx(index, query.rect, query.requests, phi, reader, score_params)
            ans = ap
            per_request = [
                (r.value, r.ci.lo if r.ci else None, r.ci.hi if r.ci else None, r.reported_bound)
                for r in ap.results
            ]
        report.rows_read_seq.append(ans.telemetry.rows_read)
        report.tiles_split_seq.append(ans.telemetry.tiles_split)
        report.elapsed_us_seq.append(ans.telemetry.elapsed_us)
        answers.append((query, per_request, ans.telemetry))

    scanner = None
    if with_oracle:
        scanner = OracleScanner(
            file_path,
            descriptor.axis_x,
            descriptor.axis_y,
            descriptor.delimiter,
            descriptor.has_header,
        )
    for qi, (query, per_request, tel) in enumerate(answers):
        truths = [None] * len(query.requests)
        if scanner is not None:
            rect = (query.rect.x_min, query.rect.x_max, query.rect.y_min, query.rect.y_max)
            truths = scanner.evaluate(rect, [(r.function, r.attribute) for r in query.requests])
        for r, (value, lo, hi, bound), truth in zip(query.requests, per_request, truths):
            report.rows.append(ReportRow(
                query_idx=qi,
                mode=mode.label(),
                phi=mode.phi if mode.kind == "approx" else None,
                elapsed_us=tel.elapsed_us,
                rows_read=tel.rows_read,
                tiles_split=tel.tiles_split,
                agg=_agg_label(descriptor, r),
                value=value,
                ci_lo=lo,
                ci_hi=hi,
                reported_bound=bound,
                oracle=truth if scanner is not None else None,
                actual_error=relative_error(value, truth) if scanner is not None else None,
            ))
    return report
