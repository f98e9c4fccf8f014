"""Approximate window aggregates with deterministic error bounds.

Partially contained tiles contribute intervals derived from their stored
metadata: an in-window count (known exactly from in-memory axis values)
bracketed by the tile's min and max. Combining those with the exact sums of
fully contained tiles yields a confidence interval that is guaranteed to
contain the true aggregate, an approximate value inside it, and a relative
upper bound on its error. When the bound exceeds the caller's constraint,
tiles are processed greedily in score order, each step replacing one
interval with an exact contribution, until the bound is met. Tiles left
unprocessed are file reads avoided.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import MissingStats
from .exact_engine import (
    AggregateRequest,
    Telemetry,
    TileContribution,
    needed_attributes,
    process_partial_tile,
    validate_requests,
)
from .ingest import RowReader
from .tile_index import Rect, Tile, TileIndex, TilePartition


@dataclass(frozen=True)
class ConfidenceInterval:
    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass
class ScoreParams:
    """Tile-selection trade-off. alpha = 1 ranks purely by interval width;
    alpha = 0 prefers cheap (small) tiles. bounded_cost_term switches the
    cost term from 1/c_hat to (1 - c_hat), keeping scores in [0, 1]."""

    alpha: float = 1.0
    epsilon: float = 1e-12
    bounded_cost_term: bool = False

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")


@dataclass
class TileScore:
    tile: Tile
    s: float
    w: float       # tile CI width, normalized to the evaluation's maximum
    c_hat: float   # in-window count, normalized likewise


@dataclass
class RequestAnswer:
    value: Optional[float]
    ci: Optional[ConfidenceInterval]
    reported_bound: float


@dataclass
class ApproxAnswer:
    results: list[RequestAnswer]
    processed: list[TileScore]          # tiles made exact, in processing order
    width_traces: list[list[float]]     # per request: CI width after init and each step
    telemetry: Telemetry


def _stats_for(tile: Tile, attribute: int):
    if attribute not in tile.stats:
        raise MissingStats(attribute)
    s = tile.stats[attribute]
    if s.count == 0:
        raise ValueError(f"{tile} has no objects, its interval is undefined")
    return s


def tile_ci(index: TileIndex, tile: Tile, q: Rect, attribute: Optional[int], function: str) -> ConfidenceInterval:
    """Deterministic interval for one partial tile's in-window aggregate,
    from its metadata and in-window count alone."""
    n = index.count_in_window(tile, q)
    return _tile_ci(tile, n, attribute, function)


def _tile_ci(tile: Tile, n: int, attribute: Optional[int], function: str) -> ConfidenceInterval:
    if function == "count":
        return ConfidenceInterval(float(n), float(n))
    s = _stats_for(tile, attribute)
    if function == "sum":
        return ConfidenceInterval(n * s.min, n * s.max)
    # mean, min and max of the in-window objects all lie within the tile's value range
    return ConfidenceInterval(s.min, s.max)


def error_bound(value: float, ci: ConfidenceInterval, epsilon: float = 1e-12) -> float:
    """Relative upper error bound: worst deviation of the value to either
    interval end, normalized by the value's magnitude. A point interval is
    exact (bound 0); values near zero blow the bound up, forcing refinement."""
    return max(value - ci.lo, ci.hi - value) / max(abs(value), epsilon)


def tile_score(
    tile: Tile,
    n_t: int,
    w_raw: float,
    w_max: float,
    n_max: int,
    params: ScoreParams,
) -> TileScore:
    w = w_raw / w_max if w_max > 0 else 0.0
    c_hat = n_t / n_max
    if params.alpha == 1.0:
        s = w
    elif params.bounded_cost_term:
        s = params.alpha * w + (1.0 - params.alpha) * (1.0 - c_hat)
    else:
        s = params.alpha * w + (1.0 - params.alpha) / max(c_hat, params.epsilon)
    return TileScore(tile, s, w, c_hat)


@dataclass
class _PartialTerm:
    tile: Tile
    n: int
    exact: Optional[TileContribution] = None


@dataclass
class _QueryState:
    fully: list[Tile]
    partials: list[_PartialTerm]
    total: int = field(init=False)

    def __post_init__(self):
        self.total = sum(t.count for t in self.fully) + sum(p.n for p in self.partials)

    def _triples(self, attribute: Optional[int], function: str):
        """(lo, mid, hi) per contributing source; mid always within [lo, hi]."""
        for t in self.fully:
            if attribute not in t.stats:
                raise MissingStats(attribute)
            s = t.stats[attribute]
            v = s.sum if function in ("sum", "mean") else (s.min if function == "min" else s.max)
            yield v, v, v
        for p in self.partials:
            if p.exact is not None:
                c = p.exact
                if function in ("sum", "mean"):
                    v = c.sums[attribute]
                else:
                    v = c.mins[attribute] if function == "min" else c.maxs[attribute]
                yield v, v, v
            else:
                s = _stats_for(p.tile, attribute)
                if function in ("sum", "mean"):
                    yield p.n * s.min, p.n * (s.min + s.max) / 2.0, p.n * s.max
                else:
                    yield s.min, (s.min + s.max) / 2.0, s.max

    def answer(self, r: AggregateRequest, epsilon: float) -> RequestAnswer:
        if r.function == "count":
            n = float(self.total)
            return RequestAnswer(n, ConfidenceInterval(n, n), 0.0)
        if r.function in ("sum", "mean"):
            los, mids, his = [], [], []
            for lo, mid, hi in self._triples(r.attribute, r.function):
                los.append(lo)
                mids.append(mid)
                his.append(hi)
            lo, mid, hi = math.fsum(los), math.fsum(mids), math.fsum(his)
            if r.function == "mean":
                if self.total == 0:
                    return RequestAnswer(None, None, 0.0)
                lo, mid, hi = lo / self.total, mid / self.total, hi / self.total
            ci = ConfidenceInterval(lo, hi)
            return RequestAnswer(mid, ci, error_bound(mid, ci, epsilon))
        # min / max
        reduce = min if r.function == "min" else max
        triples = list(self._triples(r.attribute, r.function))
        if not triples:
            return RequestAnswer(None, None, 0.0)
        lo = reduce(t[0] for t in triples)
        mid = reduce(t[1] for t in triples)
        hi = reduce(t[2] for t in triples)
        ci = ConfidenceInterval(lo, hi)
        return RequestAnswer(mid, ci, error_bound(mid, ci, epsilon))


def query_ci(
    partition: TilePartition, attribute: Optional[int], function: str, epsilon: float = 1e-12
) -> Optional[ConfidenceInterval]:
    """Interval guaranteed to contain the window's true aggregate, computed
    from metadata alone (no tile processed). Absent when the window selects
    nothing and the function has no empty value."""
    state = _QueryState(partition.fully, [_PartialTerm(t, n) for t, n in partition.partial])
    return state.answer(AggregateRequest(function, attribute), epsilon).ci


def approximate_value(
    partition: TilePartition, attribute: Optional[int], function: str, epsilon: float = 1e-12
) -> Optional[float]:
    """Point estimate inside query_ci: exact fully-contained contributions
    plus per-tile midpoint estimates of the partial tiles."""
    state = _QueryState(partition.fully, [_PartialTerm(t, n) for t, n in partition.partial])
    return state.answer(AggregateRequest(function, attribute), epsilon).value


def evaluate_approx(
    index: TileIndex,
    q: Rect,
    requests: Sequence[AggregateRequest],
    phi: Optional[float],
    reader: RowReader,
    params: Optional[ScoreParams] = None,
) -> ApproxAnswer:
    """Answer within the accuracy constraint, processing as few partial
    tiles as the greedy score policy needs.

    phi is the ceiling on every request's reported bound; 0 forces exact,
    None (or +inf) disables processing entirely and returns the pure
    metadata estimate. Scores are computed once over the initial partial
    set, for the first request whose bound exceeds phi, and tiles are
    processed in descending score order until every bound fits.
    """
    validate_requests(index, requests)
    if phi is None:
        phi = math.inf
    if phi < 0:
        raise ValueError("phi must be >= 0")
    params = params or ScoreParams()
    t0 = time.perf_counter_ns()
    rows0 = reader.rows_read
    splits0 = index.tiles_split

    part = index.classify(q)
    state = _QueryState(part.fully, [_PartialTerm(t, n) for t, n in part.partial])
    answers = [state.answer(r, params.epsilon) for r in requests]
    traces = [[a.ci.width if a.ci else 0.0] for a in answers]
    processed: list[TileScore] = []

    def violating() -> Optional[int]:
        for i, a in enumerate(answers):
            if a.reported_bound > phi:
                return i
        return None

    first_bad = violating()
    if first_bad is not None and state.partials:
        driver = requests[first_bad]
        widths = [_tile_ci(p.tile, p.n, driver.attribute, driver.function).width for p in state.partials]
        w_max = max(widths)
        n_max = max(p.n for p in state.partials)
        scored = [
            tile_score(p.tile, p.n, w, w_max, n_max, params)
            for p, w in zip(state.partials, widths)
        ]
        order = sorted(
            range(len(scored)),
            key=lambda i: (-scored[i].s, scored[i].tile.depth, scored[i].tile.ordinal),
        )
        attrs = needed_attributes(requests)
        for i in order:
            if violating() is None:
                break
            term = state.partials[i]
            term.exact = process_partial_tile(index, term.tile, term.n, q, attrs, reader)
            processed.append(scored[i])
            answers = [state.answer(r, params.epsilon) for r in requests]
            for tr, a in zip(traces, answers):
                tr.append(a.ci.width if a.ci else 0.0)

    return ApproxAnswer(
        results=answers,
        processed=processed,
        width_traces=traces,
        telemetry=Telemetry(
            rows_read=reader.rows_read - rows0,
            tiles_split=index.tiles_split - splits0,
            elapsed_us=(time.perf_counter_ns() - t0) // 1000,
        ),
    )
