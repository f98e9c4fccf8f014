# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Mirrors kernels._py exactly: same semantics, same accumulation order for
sums (input order), so both backends produce bit-identical outputs.
"""

import numpy as np

cimport cython
from libc.math cimport INFINITY, nextafter

BACKEND = "c"


cdef inline Py_ssize_t _bisect_right(const double[::1] edges, double v) noexcept nogil:
    cdef Py_ssize_t lo = 0
    cdef Py_ssize_t hi = edges.shape[0]
    cdef Py_ssize_t mid
    while lo < hi:
        mid = (lo + hi) // 2
        if v < edges[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


def assign_cells(const double[::1] xs, const double[::1] ys,
                 const double[::1] x_edges, const double[::1] y_edges):
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t nx = x_edges.shape[0] - 1
    cdef Py_ssize_t ny = y_edges.shape[0] - 1
    out = np.empty(n, dtype=np.int64)
    cdef long long[::1] cells = out
    cdef Py_ssize_t i, ix, iy
    with nogil:
        for i in range(n):
            ix = _bisect_right(x_edges, xs[i]) - 1
            if ix < 0:
                ix = 0
            elif ix > nx - 1:
                ix = nx - 1
            iy = _bisect_right(y_edges, ys[i]) - 1
            if iy < 0:
                iy = 0
            elif iy > ny - 1:
                iy = ny - 1
            cells[i] = iy * nx + ix
    return out


cdef inline double _upper(double v, bint inclusive) noexcept nogil:
    # turn "x <= v" into "x < nextafter(v, +inf)" so the loop stays branch-free
    return nextafter(v, INFINITY) if inclusive else v


def mask_in_rect(const double[::1] xs, const double[::1] ys,
                 double x0, double x1, double y0, double y1,
                 bint include_x1, bint include_y1):
    cdef Py_ssize_t n = xs.shape[0]
    out = np.empty(n, dtype=np.bool_)
    cdef unsigned char[::1] m = out.view(np.uint8)
    cdef Py_ssize_t i
    cdef double xe = _upper(x1, include_x1)
    cdef double ye = _upper(y1, include_y1)
    with nogil:
        # bitwise instead of short-circuit so the loop auto-vectorizes
        for i in range(n):
            m[i] = <unsigned char> ((xs[i] >= x0) & (xs[i] < xe) & (ys[i] >= y0) & (ys[i] < ye))
    return out


def count_in_rect(const double[::1] xs, const double[::1] ys,
                  double x0, double x1, double y0, double y1,
                  bint include_x1, bint include_y1):
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t i
    cdef long long c = 0
    cdef double xe = _upper(x1, include_x1)
    cdef double ye = _upper(y1, include_y1)
    with nogil:
        for i in range(n):
            c += (xs[i] >= x0) & (xs[i] < xe) & (ys[i] >= y0) & (ys[i] < ye)
    return int(c)


def partition_order(const long long[::1] cells, Py_ssize_t n_cells):
    cdef Py_ssize_t n = cells.shape[0]
    counts = np.zeros(n_cells, dtype=np.int64)
    cdef long long[::1] cnt = counts
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            cnt[cells[i]] += 1
    starts_arr = np.zeros(n_cells + 1, dtype=np.int64)
    cdef long long[::1] starts = starts_arr
    cdef long long acc = 0
    for i in range(n_cells):
        starts[i] = acc
        acc += cnt[i]
    starts[n_cells] = acc
    order_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] order = order_arr
    fill_arr = starts_arr.copy()
    cdef long long[::1] fill = fill_arr
    cdef long long c
    with nogil:
        for i in range(n):
            c = cells[i]
            order[fill[c]] = i
            fill[c] += 1
    return order_arr, starts_arr


def group_stats(const long long[::1] cells, Py_ssize_t n_cells,
                const double[:, ::1] values):
    cdef Py_ssize_t n = cells.shape[0]
    cdef Py_ssize_t n_attrs = values.shape[1]
    counts_arr = np.zeros(n_cells, dtype=np.int64)
    sums_arr = np.zeros((n_cells, n_attrs))
    mins_arr = np.full((n_cells, n_attrs), np.inf)
    maxs_arr = np.full((n_cells, n_attrs), -np.inf)
    cdef long long[::1] counts = counts_arr
    cdef double[:, ::1] sums = sums_arr
    cdef double[:, ::1] mins = mins_arr
    cdef double[:, ::1] maxs = maxs_arr
    cdef Py_ssize_t i, j
    cdef long long c
    cdef double v
    with nogil:
        for i in range(n):
            c = cells[i]
            counts[c] += 1
            for j in range(n_attrs):
                v = values[i, j]
                sums[c, j] += v
                if v < mins[c, j]:
                    mins[c, j] = v
                if v > maxs[c, j]:
                    maxs[c, j] = v
    return counts_arr, sums_arr, mins_arr, maxs_arr
