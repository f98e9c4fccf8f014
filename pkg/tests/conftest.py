from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from tileprobe.exact_engine import AggregateRequest
from tileprobe.ingest import DatasetDescriptor, RowReader, ScanResult, scan_init
from tileprobe.tile_index import IndexConfig, Rect, Tile, TileIndex, initialize
from tileprobe.workload import gen_dataset


def write_csv(path: Path, rows: list[tuple], header: str = "x,y,a") -> Path:
    lines = [header] if header else []
    lines += [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


@dataclass
class Scenario:
    path: Path
    descriptor: DatasetDescriptor
    scan: ScanResult
    index: TileIndex
    reader: RowReader
    config: IndexConfig

    def fresh(self) -> "Scenario":
        """Same dataset, newly built index and reader."""
        index = initialize(self.descriptor, self.scan, self.config)
        return Scenario(self.path, self.descriptor, self.scan, index, RowReader(self.descriptor), self.config)


def build_scenario(path: Path, config: IndexConfig, tracked=(2,), axes=(0, 1)) -> Scenario:
    descriptor, scan = scan_init(path, axes[0], axes[1], list(tracked))
    index = initialize(descriptor, scan, config)
    return Scenario(path, descriptor, scan, index, RowReader(descriptor), config)


# Nine rows arranged on a 3x3 unit grid over [0,3]^2 so that the window
# [0.5,2)x[0.5,2) sees: one fully contained subtile with objects, two
# partially contained tiles (one and two in-window objects), one overlapped
# tile whose objects all fall outside the window, and untouched far cells.
REF_ROWS = [
    (0.0, 0.0, 12),   # corner anchor; in tile A, outside the window
    (0.7, 0.7, 10),   # tile A, in-window
    (0.3, 1.5, 99),   # tile B: overlaps the window but this point is outside it
    (1.5, 0.3, 30),   # tile C, outside the window
    (1.5, 0.7, 5),    # tile C, in-window
    (1.7, 0.8, 50),   # tile C, in-window
    (1.2, 1.2, 20),   # tile D; lands in the pre-split child fully inside the window
    (1.4, 1.3, 22),   # tile D, same child
    (3.0, 3.0, 1),    # far corner anchor pinning the domain to [0,3]^2
]

REF_WINDOW = Rect(0.5, 2.0, 0.5, 2.0)


@pytest.fixture
def ref_scenario(tmp_path) -> Scenario:
    path = write_csv(tmp_path / "ref.csv", REF_ROWS)
    sc = build_scenario(path, IndexConfig(initial_grid=3, split_factor=2, max_depth=8, min_split_count=1))
    # pre-split the middle-right tile (cell x=1, y=1) as the reference layout has it
    t_d = sc.index.root[1 * 3 + 1]
    sc.index.split_tile(t_d, sc.reader)
    return sc


def ref_tiles(index: TileIndex) -> dict[str, Tile]:
    return {
        "a": index.root[0 * 3 + 0],
        "b": index.root[1 * 3 + 0],   # row-major: [iy * g + ix], tile B is (ix=0, iy=1)
        "c": index.root[0 * 3 + 1],
        "d": index.root[1 * 3 + 1],
    }


@pytest.fixture(scope="session")
def uniform_10k(tmp_path_factory) -> Scenario:
    path = tmp_path_factory.mktemp("data") / "u10k.csv"
    gen_dataset(seed=101, rows=10_000, numeric_cols=4, distribution="uniform", out_path=path)
    return build_scenario(path, IndexConfig(initial_grid=8, min_split_count=32), tracked=(2, 3))


@pytest.fixture(scope="session")
def uniform_10k_table(uniform_10k) -> np.ndarray:
    """Raw rows as a float matrix, parsed independently of the engine."""
    return np.loadtxt(uniform_10k.path, delimiter=",", skiprows=1)


def brute_mask(table: np.ndarray, q: Rect, axis_x=0, axis_y=1) -> np.ndarray:
    """Reference in-window test: half-open, upper edges inclusive when the
    query reaches the data's maximum. Computed from the raw table alone."""
    x, y = table[:, axis_x], table[:, axis_y]
    mx = (x >= q.x_min) & ((x < q.x_max) | ((q.x_max >= x.max()) & (x <= q.x_max)))
    my = (y >= q.y_min) & ((y < q.y_max) | ((q.y_max >= y.max()) & (y <= q.y_max)))
    return mx & my


def brute_aggregate(table: np.ndarray, q: Rect, request: AggregateRequest, axis_x=0, axis_y=1):
    m = brute_mask(table, q, axis_x, axis_y)
    n = int(m.sum())
    if request.function == "count":
        return float(n)
    if n == 0:
        return 0.0 if request.function == "sum" else None
    col = table[m, request.attribute]
    if request.function == "sum":
        return float(np.sum(col))
    if request.function == "mean":
        return float(np.sum(col) / n)
    return float(col.min()) if request.function == "min" else float(col.max())


def random_window(rng: np.random.Generator, domain: Rect, min_frac=0.02, max_frac=0.5) -> Rect:
    dw = domain.x_max - domain.x_min
    dh = domain.y_max - domain.y_min
    w = rng.uniform(min_frac, max_frac) * dw
    h = rng.uniform(min_frac, max_frac) * dh
    x0 = rng.uniform(domain.x_min, domain.x_max - w)
    y0 = rng.uniform(domain.y_min, domain.y_max - h)
    return Rect(x0, x0 + w, y0, y0 + h)
