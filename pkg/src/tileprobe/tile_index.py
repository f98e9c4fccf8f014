"""Hierarchical tile index over the two axis attributes.

Tiles form regular grids: a g x g root grid over the tight bounding box of
the data, with leaves subdividing into k x k children when split. Leaves
hold the axis values and byte offsets of their objects; every tile carries
per-attribute aggregate metadata (count, sum, min, max) computed when the
tile is created, so confidence intervals are available from the first
query.

Containment is half-open: a point belongs to a rect when
x_min <= x < x_max (same for y), except that a rect whose upper edge
reaches the domain's maximum also includes that edge. This covers the
domain exactly once, so every object lives in exactly one leaf.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from . import kernels
from .errors import AuditError, MaxDepthReached, SplitOnInternal
from .ingest import DatasetDescriptor, RowReader, ScanResult


@dataclass(frozen=True)
class Rect:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min <= self.x_max and self.y_min <= self.y_max):
            raise ValueError(f"degenerate rect: {self}")

    def to_dict(self) -> dict:
        return {"xMin": self.x_min, "xMax": self.x_max, "yMin": self.y_min, "yMax": self.y_max}

    @classmethod
    def from_dict(cls, d: dict) -> "Rect":
        return cls(float(d["xMin"]), float(d["xMax"]), float(d["yMin"]), float(d["yMax"]))


@dataclass
class IndexConfig:
    initial_grid: int = 32
    split_factor: int = 2
    max_depth: int = 8
    min_split_count: int = 256

    def __post_init__(self):
        if self.initial_grid < 1 or self.split_factor < 2:
            raise ValueError("initial_grid must be >= 1 and split_factor >= 2")
        if self.max_depth < 0 or self.min_split_count < 1:
            raise ValueError("max_depth must be >= 0 and min_split_count >= 1")


@dataclass
class AggStats:
    """Per-tile metadata for one tracked attribute. Empty tiles have no
    sum/min/max rather than sentinel values."""

    count: int
    sum: Optional[float]
    min: Optional[float]
    max: Optional[float]

    @classmethod
    def from_group(cls, count: int, s: float, mn: float, mx: float) -> "AggStats":
        if count == 0:
            return cls(0, None, None, None)
        return cls(int(count), float(s), float(mn), float(mx))


class Tile:
    __slots__ = ("bounds", "depth", "ordinal", "count", "xs", "ys", "offsets",
                 "stats", "children", "x_edges", "y_edges")

    def __init__(self, bounds: Rect, depth: int, ordinal: int):
        self.bounds = bounds
        self.depth = depth
        self.ordinal = ordinal
        self.count = 0
        self.xs: Optional[np.ndarray] = None
        self.ys: Optional[np.ndarray] = None
        self.offsets: Optional[np.ndarray] = None
        self.stats: dict[int, AggStats] = {}
        self.children: Optional[list["Tile"]] = None
        self.x_edges: Optional[np.ndarray] = None
        self.y_edges: Optional[np.ndarray] = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    def __repr__(self):
        kind = "leaf" if self.is_leaf else "internal"
        return f"Tile(#{self.ordinal} d{self.depth} {kind} n={self.count})"


@dataclass
class TilePartition:
    """Query-time split of overlapped leaves: fully contained tiles and
    (partial tile, in-window count) pairs. Empty tiles appear in neither."""

    fully: list[Tile] = field(default_factory=list)
    partial: list[tuple[Tile, int]] = field(default_factory=list)


@dataclass
class SplitResult:
    """Children of a split plus the pre-split entry arrays and the tracked
    values just read, so callers can derive in-window contributions without
    a second file access."""

    children: list[Tile]
    xs: np.ndarray
    ys: np.ndarray
    offsets: np.ndarray
    values: np.ndarray  # (count, n_tracked), columns follow tracked_attributes order


def grid_edges(lo: float, hi: float, n: int) -> np.ndarray:
    """n+1 cell edges over [lo, hi]; endpoints exact, forced monotone."""
    e = lo + (hi - lo) * np.arange(n + 1, dtype=np.float64) / n
    e[0] = lo
    e[-1] = hi
    return np.maximum.accumulate(e)


class TileIndex:
    def __init__(self, descriptor: DatasetDescriptor, config: IndexConfig, domain: Rect):
        self.descriptor = descriptor
        self.config = config
        self.domain = domain
        self.root: list[Tile] = []
        self.x_edges: Optional[np.ndarray] = None
        self.y_edges: Optional[np.ndarray] = None
        self.tiles_split = 0
        self._next_ordinal = 0

    # -- geometry ---------------------------------------------------------

    def _closure(self, q: Rect) -> tuple[bool, bool]:
        return q.x_max >= self.domain.x_max, q.y_max >= self.domain.y_max

    def count_in_window(self, tile: Tile, q: Rect) -> int:
        """Objects of a leaf tile inside q. In-memory axis values only."""
        if not tile.is_leaf:
            raise SplitOnInternal(f"{tile} is not a leaf")
        if tile.count == 0:
            return 0
        inc_x, inc_y = self._closure(q)
        return kernels.count_in_rect(tile.xs, tile.ys, q.x_min, q.x_max, q.y_min, q.y_max, inc_x, inc_y)

    def window_mask(self, tile: Tile, q: Rect) -> np.ndarray:
        inc_x, inc_y = self._closure(q)
        return kernels.mask_in_rect(tile.xs, tile.ys, q.x_min, q.x_max, q.y_min, q.y_max, inc_x, inc_y)

    # -- classification ---------------------------------------------------

    def classify(self, q: Rect) -> TilePartition:
        """Partition overlapped leaves into fully and partially contained
        sets. Read-only: no file access, no structural change."""
        part = TilePartition()
        if not self.root:
            return part
        g = self.config.initial_grid
        for tile in self._candidates(self.root, self.x_edges, self.y_edges, g, q):
            self._classify_tile(tile, q, part)
        return part

    @staticmethod
    def _candidates(tiles: list[Tile], x_edges, y_edges, nx: int, q: Rect) -> Iterator[Tile]:
        """Grid cells possibly overlapping q, row-major. Conservative: exact
        containment/count tests downstream settle borderline cells."""
        xe = x_edges.tolist()
        ye = y_edges.tolist()
        i0 = min(max(bisect.bisect_right(xe, q.x_min) - 1, 0), nx - 1)
        i1 = min(bisect.bisect_left(xe, q.x_max) - 1, nx - 1)
        ny = len(ye) - 1
        j0 = min(max(bisect.bisect_right(ye, q.y_min) - 1, 0), ny - 1)
        j1 = min(bisect.bisect_left(ye, q.y_max) - 1, ny - 1)
        if q.x_min > xe[-1] or q.y_min > ye[-1] or q.x_max < xe[0] or q.y_max < ye[0]:
            return
        for j in range(j0, j1 + 1):
            for i in range(i0, i1 + 1):
                yield tiles[j * nx + i]

    def _classify_tile(self, tile: Tile, q: Rect, part: TilePartition) -> None:
        b = tile.bounds
        if q.x_min <= b.x_min and b.x_max <= q.x_max and q.y_min <= b.y_min and b.y_max <= q.y_max:
            self._collect_contained(tile, part)
            return
        if tile.is_leaf:
            n = self.count_in_window(tile, q)
            if n > 0:
                part.partial.append((tile, n))
            return
        k = self.config.split_factor
        for child in self._candidates(tile.children, tile.x_edges, tile.y_edges, k, q):
            self._classify_tile(child, q, part)

    def _collect_contained(self, tile: Tile, part: TilePartition) -> None:
        if tile.count == 0:
            return
        if tile.is_leaf:
            part.fully.append(tile)
        else:
            for child in tile.children:
                self._collect_contained(child, part)

    def window_count(self, q: Rect) -> int:
        part = self.classify(q)
        return sum(t.count for t in part.fully) + sum(n for _, n in part.partial)

    # -- adaptation -------------------------------------------------------

    def split_tile(self, tile: Tile, reader: RowReader) -> SplitResult:
        """Split a leaf into k x k children: re-read the tile's rows once,
        redistribute entries by axis values, and compute complete child
        metadata. Costs exactly tile.count row reads."""
        if not tile.is_leaf:
            raise SplitOnInternal(f"{tile} is already split")
        if tile.depth >= self.config.max_depth:
            raise MaxDepthReached(f"{tile} at max depth {self.config.max_depth}")
        if tile.count < 1:
            raise ValueError(f"cannot split empty {tile}")

        tracked = self.descriptor.tracked_attributes
        values = reader.read_rows(tile.offsets, tracked)
        k = self.config.split_factor
        b = tile.bounds
        x_edges = grid_edges(b.x_min, b.x_max, k)
        y_edges = grid_edges(b.y_min, b.y_max, k)
        cells = kernels.assign_cells(tile.xs, tile.ys, x_edges, y_edges)
        counts, sums, mins, maxs = kernels.group_stats(cells, k * k, values)
        order, starts = kernels.partition_order(cells, k * k)
        sx = tile.xs[order]
        sy = tile.ys[order]
        so = tile.offsets[order]

        children = []
        for j in range(k):
            for i in range(k):
                c = j * k + i
                child = Tile(
                    Rect(float(x_edges[i]), float(x_edges[i + 1]), float(y_edges[j]), float(y_edges[j + 1])),
                    tile.depth + 1,
                    self._next_ordinal,
                )
                self._next_ordinal += 1
                child.count = int(counts[c])
                lo, hi = int(starts[c]), int(starts[c + 1])
                child.xs = sx[lo:hi]
                child.ys = sy[lo:hi]
                child.offsets = so[lo:hi]
                child.stats = {
                    a: AggStats.from_group(counts[c], sums[c, m], mins[c, m], maxs[c, m])
                    for m, a in enumerate(tracked)
                }
                children.append(child)

        result = SplitResult(children, tile.xs, tile.ys, tile.offsets, values)
        tile.children = children
        tile.x_edges = x_edges
        tile.y_edges = y_edges
        tile.xs = tile.ys = tile.offsets = None
        self.tiles_split += 1
        return result

    def split_eligible(self, tile: Tile) -> bool:
        return (
            tile.is_leaf
            and tile.depth < self.config.max_depth
            and tile.count > self.config.min_split_count
        )

    # -- traversal and export ---------------------------------------------

    def leaves(self) -> Iterator[Tile]:
        stack = list(reversed(self.root))
        while stack:
            t = stack.pop()
            if t.is_leaf:
                yield t
            else:
                stack.extend(reversed(t.children))

    def collect_points(self, q: Rect, limit: int) -> list[tuple[float, float]]:
        """Up to limit (x, y) pairs inside q, from in-memory entries only."""
        out: list[tuple[float, float]] = []
        part = self.classify(q)
        for tile in part.fully:
            for i in range(len(tile.xs)):
                if len(out) >= limit:
                    return out
                out.append((float(tile.xs[i]), float(tile.ys[i])))
        for tile, _ in part.partial:
            mask = self.window_mask(tile, q)
            for x, y in zip(tile.xs[mask], tile.ys[mask]):
                if len(out) >= limit:
                    return out
                out.append((float(x), float(y)))
        return out

    def snapshot(self, max_depth: Optional[int] = None) -> dict:
        """JSON-ready tree of tile bounds, depth, count and per-attribute
        stats. Entries are omitted."""
        names = self.descriptor.column_names

        def node(tile: Tile) -> dict:
            d = {
                "bounds": tile.bounds.to_dict(),
                "depth": tile.depth,
                "count": tile.count,
                "stats": {
                    names[a]: {"sum": s.sum, "min": s.min, "max": s.max}
                    for a, s in tile.stats.items()
                    if s.count > 0
                },
            }
            if tile.children is not None and (max_depth is None or tile.depth < max_depth):
                d["children"] = [node(c) for c in tile.children]
            return d

        return {
            "domain": self.domain.to_dict(),
            "initial_grid": self.config.initial_grid,
            "split_factor": self.config.split_factor,
            "row_count": self.descriptor.row_count,
            "tiles_split": self.tiles_split,
            "tiles": [node(t) for t in self.root],
        }

    def clone(self) -> "TileIndex":
        """Structural deep copy. Entry arrays are shared: they are never
        mutated in place, splits only rebind them."""
        other = TileIndex(self.descriptor, self.config, self.domain)
        other.x_edges = self.x_edges
        other.y_edges = self.y_edges
        other.tiles_split = self.tiles_split
        other._next_ordinal = self._next_ordinal

        def copy_tile(t: Tile) -> Tile:
            c = Tile(t.bounds, t.depth, t.ordinal)
            c.count = t.count
            c.xs, c.ys, c.offsets = t.xs, t.ys, t.offsets
            c.stats = dict(t.stats)
            c.x_edges, c.y_edges = t.x_edges, t.y_edges
            if t.children is not None:
                c.children = [copy_tile(ch) for ch in t.children]
            return c

        other.root = [copy_tile(t) for t in self.root]
        return other


def initialize(descriptor: DatasetDescriptor, scan: ScanResult, config: IndexConfig | None = None) -> TileIndex:
    """Build the crude initial index: tight domain, g x g leaf grid, every
    object placed, and root-tile metadata for every tracked attribute
    computed from the scan's tracked values (which are not retained)."""
    config = config or IndexConfig()
    n = len(scan)
    if n > 0:
        domain = Rect(
            float(scan.xs.min()), float(scan.xs.max()),
            float(scan.ys.min()), float(scan.ys.max()),
        )
    else:
        domain = Rect(0.0, 1.0, 0.0, 1.0)

    index = TileIndex(descriptor, config, domain)
    g = config.initial_grid
    x_edges = grid_edges(domain.x_min, domain.x_max, g)
    y_edges = grid_edges(domain.y_min, domain.y_max, g)
    index.x_edges = x_edges
    index.y_edges = y_edges

    tracked = descriptor.tracked_attributes
    if n > 0:
        cells = kernels.assign_cells(scan.xs, scan.ys, x_edges, y_edges)
        counts, sums, mins, maxs = kernels.group_stats(cells, g * g, scan.tracked_values)
        order, starts = kernels.partition_order(cells, g * g)
        sx = scan.xs[order]
        sy = scan.ys[order]
        so = scan.offsets[order]
    else:
        counts = np.zeros(g * g, dtype=np.int64)

    for j in range(g):
        for i in range(g):
            c = j * g + i
            tile = Tile(
                Rect(float(x_edges[i]), float(x_edges[i + 1]), float(y_edges[j]), float(y_edges[j + 1])),
                0,
                index._next_ordinal,
            )
            index._next_ordinal += 1
            tile.count = int(counts[c])
            if n > 0:
                lo, hi = int(starts[c]), int(starts[c + 1])
                tile.xs = sx[lo:hi]
                tile.ys = sy[lo:hi]
                tile.offsets = so[lo:hi]
                tile.stats = {
                    a: AggStats.from_group(counts[c], sums[c, m], mins[c, m], maxs[c, m])
                    for m, a in enumerate(tracked)
                }
            else:
                tile.xs = np.empty(0)
                tile.ys = np.empty(0)
                tile.offsets = np.empty(0, dtype=np.int64)
                tile.stats = {a: AggStats(0, None, None, None) for a in tracked}
            index.root.append(tile)
    return index


def audit(index: TileIndex, rtol: float = 1e-9) -> None:
    """Full structural check; raises AuditError on the first violation.

    Verifies the leaf partition (every object in exactly one leaf, inside
    its bounds), parent/child metadata consistency (counts additive, min/max
    nested exactly, sums additive within rtol) and stats well-formedness.
    """
    cfg = index.config
    if index.x_edges[0] != index.domain.x_min or index.x_edges[-1] != index.domain.x_max:
        raise AuditError("root x edges do not span the domain")
    if index.y_edges[0] != index.domain.y_min or index.y_edges[-1] != index.domain.y_max:
        raise AuditError("root y edges do not span the domain")

    total = 0

    def check(tile: Tile) -> None:
        nonlocal total
        if set(tile.stats) != set(index.descriptor.tracked_attributes):
            raise AuditError(f"{tile}: stats cover {sorted(tile.stats)} instead of the tracked attributes")
        for a, s in tile.stats.items():
            if s.count != tile.count:
                raise AuditError(f"{tile}: stats count {s.count} != tile count {tile.count} for attr {a}")
            if s.count == 0:
                if not (s.sum is None and s.min is None and s.max is None):
                    raise AuditError(f"{tile}: empty tile carries sentinel stats for attr {a}")
            else:
                if s.sum is None or s.min is None or s.max is None:
                    raise AuditError(f"{tile}: missing stats fields for attr {a}")
                mean = s.sum / s.count
                slack = 1e-9 * max(abs(s.min), abs(s.max), 1.0)
                if not (s.min - slack <= mean <= s.max + slack):
                    raise AuditError(f"{tile}: mean {mean} outside [{s.min}, {s.max}] for attr {a}")
        if tile.is_leaf:
            total += tile.count
            if len(tile.xs) != tile.count or len(tile.ys) != tile.count or len(tile.offsets) != tile.count:
                raise AuditError(f"{tile}: entry arrays disagree with count")
            b = tile.bounds
            inc_x = b.x_max >= index.domain.x_max
            inc_y = b.y_max >= index.domain.y_max
            inside = kernels.count_in_rect(tile.xs, tile.ys, b.x_min, b.x_max, b.y_min, b.y_max, inc_x, inc_y)
            if inside != tile.count:
                raise AuditError(f"{tile}: {tile.count - inside} entries outside bounds")
            return
        k = cfg.split_factor
        if len(tile.children) != k * k:
            raise AuditError(f"{tile}: expected {k * k} children")
        xe = grid_edges(tile.bounds.x_min, tile.bounds.x_max, k)
        ye = grid_edges(tile.bounds.y_min, tile.bounds.y_max, k)
        if not (np.array_equal(xe, tile.x_edges) and np.array_equal(ye, tile.y_edges)):
            raise AuditError(f"{tile}: stored child edges drifted from bounds")
        for j in range(k):
            for i in range(k):
                cb = tile.children[j * k + i].bounds
                if (cb.x_min, cb.x_max, cb.y_min, cb.y_max) != (xe[i], xe[i + 1], ye[j], ye[j + 1]):
                    raise AuditError(f"{tile}: child {j * k + i} bounds do not tile the parent")
        if sum(c.count for c in tile.children) != tile.count:
            raise AuditError(f"{tile}: children counts do not add up")
        for a, s in tile.stats.items():
            if s.count == 0:
                continue
            child_stats = [c.stats[a] for c in tile.children if c.stats[a].count > 0]
            if s.min != min(cs.min for cs in child_stats):
                raise AuditError(f"{tile}: min not nested for attr {a}")
            if s.max != max(cs.max for cs in child_stats):
                raise AuditError(f"{tile}: max not nested for attr {a}")
            child_sum = sum(cs.sum for cs in child_stats)
            if abs(child_sum - s.sum) > rtol * max(abs(s.sum), abs(child_sum), 1e-300):
                raise AuditError(f"{tile}: sums not additive for attr {a}: {s.sum} vs {child_sum}")
        for child in tile.children:
            check(child)

    for t in index.root:
        check(t)
    if total != index.descriptor.row_count:
        raise AuditError(f"leaf counts total {total} != row_count {index.descriptor.row_count}")
