"""Ground-truth full-scan evaluator used to check the engines.

Deliberately independent: this module must not import or call the index or
engine modules, and it parses the CSV itself. It implements the same window
convention the engines document (half-open rects, upper edges inclusive
when they reach the data's maximum), derived from its own scan of the data.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from .errors import IoFailure

RectTuple = tuple[float, float, float, float]  # (x_min, x_max, y_min, y_max)
RequestTuple = tuple[str, Optional[int]]       # (function, attribute column)


class OracleScanner:
    """Loads the file once (a single sequential scan) and answers any number
    of window-aggregate queries from the in-memory columns."""

    def __init__(self, path, axis_x: int, axis_y: int, delimiter: str = ",", has_header: bool = True):
        path = Path(path)
        if not path.is_file():
            raise IoFailure(f"no such file: {path}")
        try:
            frame = pd.read_csv(
                path,
                sep=delimiter,
                header=0 if has_header else None,
                dtype=np.float64,
            )
        except OSError as exc:
            raise IoFailure(str(exc)) from exc
        self.columns = frame.to_numpy(dtype=np.float64, copy=True)
        if self.columns.ndim != 2:
            self.columns = self.columns.reshape(len(frame), -1)
        self.x = self.columns[:, axis_x] if len(frame) else np.empty(0)
        self.y = self.columns[:, axis_y] if len(frame) else np.empty(0)
        self.x_hi = float(self.x.max()) if len(self.x) else None
        self.y_hi = float(self.y.max()) if len(self.y) else None

    def select(self, rect: RectTuple) -> np.ndarray:
        x_min, x_max, y_min, y_max = rect
        m = (self.x >= x_min) & (self.y >= y_min)
        if self.x_hi is not None and x_max >= self.x_hi:
            m &= self.x <= x_max
        else:
            m &= self.x < x_max
        if self.y_hi is not None and y_max >= self.y_hi:
            m &= self.y <= y_max
        else:
            m &= self.y < y_max
        return m

    def evaluate(self, rect: RectTuple, requests: Sequence[RequestTuple]) -> list[Optional[float]]:
        mask = self.select(rect)
        n = int(np.count_nonzero(mask))
        out: list[Optional[float]] = []
        for function, attribute in requests:
            if function == "count":
                out.append(float(n))
                continue
            if n == 0:
                out.append(0.0 if function == "sum" else None)
                continue
            col = self.columns[mask, attribute]
            if function == "sum":
                out.append(math.fsum(col))
            elif function == "mean":
                out.append(math.fsum(col) / n)
            elif function == "min":
                out.append(float(col.min()))
            elif function == "max":
                out.append(float(col.max()))
            else:
                raise ValueError(f"unknown aggregate function {function!r}")
        return out


def oracle(
    path,
    rect: RectTuple,
    requests: Sequence[RequestTuple],
    axis_x: int,
    axis_y: int,
    delimiter: str = ",",
    has_header: bool = True,
) -> list[Optional[float]]:
    """One-shot form: scan the file and answer a single window query."""
    return OracleScanner(path, axis_x, axis_y, delimiter, has_header).evaluate(rect, requests)
