"""Exact window-aggregate evaluation with full index adaptation.

Fully contained tiles are answered from their stored metadata; every
partially contained tile is processed: split when eligible (one level per
query, reading all of its rows once and producing complete child metadata)
or answered by reading just its in-window rows. This is the baseline the
approximate engine is measured against.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import UntrackedAttribute
from .ingest import RowReader
from .tile_index import Rect, Tile, TileIndex

AGG_FUNCTIONS = ("count", "sum", "mean", "min", "max")


@dataclass(frozen=True)
class AggregateRequest:
    function: str
    attribute: Optional[int] = None  # may be omitted for count


@dataclass
class Telemetry:
    rows_read: int
    tiles_split: int
    elapsed_us: int


@dataclass
class ExactAnswer:
    values: list[Optional[float]]  # one per request; None when the window is empty
    telemetry: Telemetry


@dataclass
class TileContribution:
    """Exact in-window aggregates of one processed partial tile."""

    n: int
    sums: dict[int, float]
    mins: dict[int, float]
    maxs: dict[int, float]


def validate_requests(index: TileIndex, requests: Sequence[AggregateRequest]) -> None:
    tracked = set(index.descriptor.tracked_attributes)
    for r in requests:
        if r.function not in AGG_FUNCTIONS:
            raise ValueError(f"unknown aggregate function {r.function!r}")
        if r.function == "count" and r.attribute is None:
            continue
        if r.attribute is None:
            raise ValueError(f"{r.function} requires an attribute")
        if r.attribute not in tracked:
            raise UntrackedAttribute(r.attribute)


def needed_attributes(requests: Sequence[AggregateRequest]) -> list[int]:
    """Attributes whose raw values a partial tile must supply. count never
    needs file access: in-window counts come from in-memory axis values."""
    return sorted({r.attribute for r in requests if r.function != "count"})


def process_partial_tile(
    index: TileIndex,
    tile: Tile,
    n_t: int,
    q: Rect,
    attrs: Sequence[int],
    reader: RowReader,
) -> TileContribution:
    """Make a partial tile's contribution exact, adapting the index when
    worthwhile: split eligible tiles (reads the whole tile once, children
    keep the metadata), otherwise read only the in-window rows."""
    mask = index.window_mask(tile, q)
    if index.split_eligible(tile):
        res = index.split_tile(tile, reader)
        cols = {a: index.descriptor.tracked_attributes.index(a) for a in attrs}
        in_vals = {a: res.values[mask, cols[a]] for a in attrs}
    else:
        vals = reader.read_rows(tile.offsets[mask], attrs)
        in_vals = {a: vals[:, j] for j, a in enumerate(attrs)}

    n = int(mask.sum())
    if n != n_t:
        raise AssertionError(f"window count drifted for {tile}: {n} != {n_t}")
    sums = {a: math.fsum(in_vals[a]) for a in attrs}
    mins = {a: float(in_vals[a].min()) for a in attrs} if n else {}
    maxs = {a: float(in_vals[a].max()) for a in attrs} if n else {}
    return TileContribution(n, sums, mins, maxs)


class _Accumulator:
    """Combines exact per-source contributions into per-request answers."""

    def __init__(self, attrs: Sequence[int]):
        self.count = 0
        self.sum_parts: dict[int, list[float]] = {a: [] for a in attrs}
        self.mins: dict[int, float] = {}
        self.maxs: dict[int, float] = {}

    def add_stats(self, tile: Tile, attrs: Sequence[int]) -> None:
        self.count += tile.count
        for a in attrs:
            s = tile.stats[a]
            self.sum_parts[a].append(s.sum)
            self._merge(a, s.min, s.max)

    def add_contribution(self, c: TileContribution, attrs: Sequence[int]) -> None:
        self.count += c.n
        for a in attrs:
            self.sum_parts[a].append(c.sums[a])
            self._merge(a, c.mins[a], c.maxs[a])

    def _merge(self, a: int, mn: float, mx: float) -> None:
        if a not in self.mins or mn < self.mins[a]:
            self.mins[a] = mn
        if a not in self.maxs or mx > self.maxs[a]:
            self.maxs[a] = mx

    def answer(self, r: AggregateRequest) -> Optional[float]:
        if r.function == "count":
            return float(self.count)
        if r.function == "sum":
            return math.fsum(self.sum_parts[r.attribute])
        if self.count == 0:
            return None
        if r.function == "mean":
            return math.fsum(self.sum_parts[r.attribute]) / self.count
        if r.function == "min":
            return self.mins[r.attribute]
        return self.maxs[r.attribute]


def evaluate_exact(
    index: TileIndex,
    q: Rect,
    requests: Sequence[AggregateRequest],
    reader: RowReader,
) -> ExactAnswer:
    """Answer every request exactly, adapting the index along the way.

    Takes the index writer role: partial tiles may be split. One exact
    evaluation at a time per index.
    """
    validate_requests(index, requests)
    t0 = time.perf_counter_ns()
    rows0 = reader.rows_read
    splits0 = index.tiles_split

    attrs = needed_attributes(requests)
    part = index.classify(q)
    acc = _Accumulator(attrs)
    for tile in part.fully:
        acc.add_stats(tile, attrs)
    for tile, n_t in part.partial:
        if attrs:
            acc.add_contribution(process_partial_tile(index, tile, n_t, q, attrs, reader), attrs)
        else:
            acc.count += n_t

    values = [acc.answer(r) for r in requests]
    return ExactAnswer(
        values=values,
        telemetry=Telemetry(
            rows_read=reader.rows_read - rows0,
            tiles_split=index.tiles_split - splits0,
            elapsed_us=(time.perf_counter_ns() - t0) // 1000,
        ),
    )
