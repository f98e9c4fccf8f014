"""NumPy implementations of the hot kernels.

Fallback backend used when the compiled extension is unavailable. Both
backends must be observationally identical: counts, orderings, mins and
maxs are bit-exact, and grouped sums accumulate in input order so that
results match the C loop (np.bincount also sums in input order).
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def assign_cells(xs, ys, x_edges, y_edges):
    """Flat grid-cell id (iy * nx + ix) per point, searchsorted semantics.

    A point at an inner edge belongs to the cell to its right/top; points
    at or beyond the last edge are clamped into the last cell.
    """
    nx = len(x_edges) - 1
    ny = len(y_edges) - 1
    ix = np.searchsorted(x_edges, xs, side="right") - 1
    np.clip(ix, 0, nx - 1, out=ix)
    iy = np.searchsorted(y_edges, ys, side="right") - 1
    np.clip(iy, 0, ny - 1, out=iy)
    return (iy * nx + ix).astype(np.int64, copy=False)


def mask_in_rect(xs, ys, x0, x1, y0, y1, include_x1, include_y1):
    m = (xs >= x0) & (ys >= y0)
    m &= (xs <= x1) if include_x1 else (xs < x1)
    m &= (ys <= y1) if include_y1 else (ys < y1)
    return m


def count_in_rect(xs, ys, x0, x1, y0, y1, include_x1, include_y1):
    return int(np.count_nonzero(mask_in_rect(xs, ys, x0, x1, y0, y1, include_x1, include_y1)))


def partition_order(cells, n_cells):
    """Stable permutation grouping points by cell, plus segment starts.

    Returns (order, starts) with starts of length n_cells + 1 so that
    order[starts[c]:starts[c + 1]] are the input indices of cell c, in
    input order.
    """
    order = np.argsort(cells, kind="stable")
    starts = np.searchsorted(cells[order], np.arange(n_cells + 1))
    return order.astype(np.int64, copy=False), starts.astype(np.int64, copy=False)


def group_stats(cells, n_cells, values):
    """Per-cell count/sum/min/max for each value column.

    values has shape (n_points, n_attrs). Empty cells get sum 0, min +inf,
    max -inf; callers translate those into absent stats.
    """
    n_attrs = values.shape[1]
    counts = np.bincount(cells, minlength=n_cells).astype(np.int64)
    sums = np.zeros((n_cells, n_attrs))
    mins = np.full((n_cells, n_attrs), np.inf)
    maxs = np.full((n_cells, n_attrs), -np.inf)
    order, starts = partition_order(cells, n_cells)
    nonempty = counts > 0
    seg_starts = starts[:-1][nonempty]
    for j in range(n_attrs):
        v = values[:, j]
        sums[:, j] = np.bincount(cells, weights=v, minlength=n_cells)
        if len(seg_starts):
            sv = v[order]
            mins[nonempty, j] = np.minimum.reduceat(sv, seg_starts)
            maxs[nonempty, j] = np.maximum.reduceat(sv, seg_starts)
    return counts, sums, mins, maxs
