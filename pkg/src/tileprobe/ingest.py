"""Raw CSV scanning and random-access row reads.

This is the only module that touches the data file. The initial scan is a
single sequential pass that records, per row, the two axis values, the byte
offset of the row start, and the values of the tracked attributes (the
latter are consumed once by index initialization and then dropped).
Subsequent access goes through RowReader.read_rows, which re-reads rows by
byte offset and is the I/O cost the index exists to minimize.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import IoFailure, MalformedRow, NonNumeric


@dataclass
class DatasetDescriptor:
    file_path: Path
    column_names: list[str]
    column_count: int
    axis_x: int
    axis_y: int
    tracked_attributes: list[int]
    row_count: int
    delimiter: str = ","
    has_header: bool = True


@dataclass(frozen=True)
class ObjectEntry:
    x: float
    y: float
    offset: int


@dataclass
class ScanResult:
    """Columnar view of the initial scan: axis values, offsets, tracked values."""

    xs: np.ndarray          # float64, shape (n,)
    ys: np.ndarray          # float64, shape (n,)
    offsets: np.ndarray     # int64, shape (n,)
    tracked_values: np.ndarray  # float64, shape (n, len(tracked_attributes))
    skipped_rows: int = 0

    def __len__(self) -> int:
        return len(self.offsets)

    def iter_entries(self) -> Iterator[ObjectEntry]:
        for i in range(len(self.offsets)):
            yield ObjectEntry(float(self.xs[i]), float(self.ys[i]), int(self.offsets[i]))


def _validate_columns(column_count: int, axis_x: int, axis_y: int, tracked: Sequence[int]) -> None:
    if axis_x == axis_y:
        raise ValueError("axis_x and axis_y must differ")
    for c in (axis_x, axis_y):
        if not 0 <= c < column_count:
            raise ValueError(f"axis column {c} out of range for {column_count} columns")
    seen = set()
    for c in tracked:
        if not 0 <= c < column_count:
            raise ValueError(f"tracked column {c} out of range for {column_count} columns")
        if c in (axis_x, axis_y):
            raise ValueError(f"tracked column {c} collides with an axis column")
        if c in seen:
            raise ValueError(f"tracked column {c} listed twice")
        seen.add(c)


def scan_init(
    path,
    axis_x: int,
    axis_y: int,
    tracked_attributes: Sequence[int],
    delimiter: str = ",",
    has_header: bool = True,
    on_bad_row: str = "fail",
) -> tuple[DatasetDescriptor, ScanResult]:
    """Single-pass scan: offsets, axis values and tracked values per data row.

    on_bad_row is "fail" (raise on the first malformed or non-numeric row)
    or "skip" (count the row and continue). Axis and tracked fields must be
    finite numerics; NaN/Inf are rejected as NonNumeric.
    """
    if on_bad_row not in ("fail", "skip"):
        raise ValueError(f"on_bad_row must be 'fail' or 'skip', got {on_bad_row!r}")
    if len(delimiter) != 1:
        raise ValueError("delimiter must be a single character")
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(path)

    delim = delimiter.encode()
    tracked = list(tracked_attributes)
    wanted = [axis_x, axis_y, *tracked]
    xs: list[float] = []
    ys: list[float] = []
    offsets: list[int] = []
    tracked_cols: list[list[float]] = [[] for _ in tracked]
    skipped = 0
    column_count = -1
    column_names: list[str] = []
    isfinite = math.isfinite

    with open(path, "rb") as f:
        pos = 0
        line_no = 0
        if has_header:
            header = f.readline()
            if not header:
                raise MalformedRow(1, "missing header line")
            line_no = 1
            pos = len(header)
            column_names = [c.strip() for c in header.rstrip(b"\r\n").decode("utf-8").split(delimiter)]
            column_count = len(column_names)
            _validate_columns(column_count, axis_x, axis_y, tracked)

        for raw in f:
            line_no += 1
            row_start = pos
            pos += len(raw)
            fields = raw.rstrip(b"\r\n").split(delim)
            if column_count < 0:
                column_count = len(fields)
                column_names = [f"c{i}" for i in range(column_count)]
                _validate_columns(column_count, axis_x, axis_y, tracked)
            if len(fields) != column_count:
                if on_bad_row == "skip":
                    skipped += 1
                    continue
                raise MalformedRow(line_no, f"expected {column_count} fields, got {len(fields)}")
            try:
                row_vals = [float(fields[c]) for c in wanted]
            except ValueError:
                skipped += 1
                if on_bad_row == "skip":
                    continue
                bad = next(c for c in wanted if not _parses_finite(fields[c]))
                raise NonNumeric(line_no, bad, fields[bad].decode("utf-8", "replace")) from None
            if not all(isfinite(v) for v in row_vals):
                skipped += 1
                if on_bad_row == "skip":
                    continue
                bad = next(c for c in wanted if not _parses_finite(fields[c]))
                raise NonNumeric(line_no, bad, fields[bad].decode("utf-8", "replace"))
            xs.append(row_vals[0])
            ys.append(row_vals[1])
            offsets.append(row_start)
            for j in range(len(tracked)):
                tracked_cols[j].append(row_vals[2 + j])

    if column_count < 0:
        # No header and no data rows: infer the narrowest consistent width.
        column_count = max([axis_x, axis_y, *tracked], default=0) + 1
        column_names = [f"c{i}" for i in range(column_count)]
        _validate_columns(column_count, axis_x, axis_y, tracked)

    n = len(offsets)
    scan = ScanResult(
        xs=np.asarray(xs, dtype=np.float64),
        ys=np.asarray(ys, dtype=np.float64),
        offsets=np.asarray(offsets, dtype=np.int64),
        tracked_values=np.asarray(tracked_cols, dtype=np.float64).T.reshape(n, len(tracked)).copy(),
        skipped_rows=skipped,
    )
    descriptor = DatasetDescriptor(
        file_path=path,
        column_names=column_names,
        column_count=column_count,
        axis_x=axis_x,
        axis_y=axis_y,
        tracked_attributes=tracked,
        row_count=n,
        delimiter=delimiter,
        has_header=has_header,
    )
    return descriptor, scan


def _parses_finite(field: bytes) -> bool:
    try:
        return math.isfinite(float(field))
    except ValueError:
        return False


class RowReader:
    """Random-access row reads by byte offset, with a rows-read counter.

    The counter is the I/O cost proxy used throughout: it increments by
    exactly the number of offsets requested, nothing hidden. Reads are
    issued in ascending offset order and results restored to input order.
    Safe for concurrent callers: each call opens its own handle and the
    counter update is lock-protected.
    """

    def __init__(self, descriptor: DatasetDescriptor):
        self.descriptor = descriptor
        self._delim = descriptor.delimiter.encode()
        self._lock = threading.Lock()
        self._rows_read = 0

    @property
    def rows_read(self) -> int:
        with self._lock:
            return self._rows_read

    def read_rows(self, offsets, attributes: Sequence[int]) -> np.ndarray:
        """Values of the given columns for each row offset, in input order.

        Unlike the initial scan there is no skip policy here: a row that
        fails to parse was admitted at initialization, so failing now means
        the file changed underneath us and we abort.
        """
        offsets = np.asarray(offsets, dtype=np.int64)
        attrs = list(attributes)
        for a in attrs:
            if not 0 <= a < self.descriptor.column_count:
                raise ValueError(f"column {a} out of range")
        out = np.empty((len(offsets), len(attrs)), dtype=np.float64)
        if len(offsets) == 0:
            return out
        order = np.argsort(offsets, kind="stable")
        try:
            with open(self.descriptor.file_path, "rb") as f:
                for i in order:
                    off = int(offsets[i])
                    f.seek(off)
                    raw = f.readline()
                    if not raw:
                        raise IoFailure(f"offset {off} is past end of file")
                    fields = raw.rstrip(b"\r\n").split(self._delim)
                    if len(fields) != self.descriptor.column_count:
                        raise MalformedRow(-1, f"row at offset {off} has {len(fields)} fields")
                    try:
                        for j, a in enumerate(attrs):
                            v = float(fields[a])
                            if not math.isfinite(v):
                                raise ValueError
                            out[i, j] = v
                    except ValueError:
                        raise NonNumeric(-1, a, fields[a].decode("utf-8", "replace")) from None
        except OSError as exc:
            raise IoFailure(str(exc)) from exc
        with self._lock:
            self._rows_read += len(offsets)
        return out
