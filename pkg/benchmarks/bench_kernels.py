#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Times the four hot kernels on synthetic point sets, then an end-to-end
index build plus a burst of window classifications with each backend.

    python benchmarks/bench_kernels.py [--points 1000000] [--repeat 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from tileprobe.kernels import _py

try:
    from tileprobe.kernels import _ckernels
except ImportError:
    _ckernels = None


def timeit(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(n: int, repeat: int) -> None:
    rng = np.random.default_rng(1)
    xs = rng.uniform(0, 1000, n)
    ys = rng.uniform(0, 1000, n)
    vals = np.ascontiguousarray(rng.normal(500, 100, (n, 2)))
    edges = np.linspace(0, 1000, 33)

    backends = [("python", _py)] + ([("c", _ckernels)] if _ckernels else [])
    cells = {name: impl.assign_cells(xs, ys, edges, edges) for name, impl in backends}
    # tile-sized slices: the per-query call sites see arrays this small
    txs, tys = xs[:2000], ys[:2000]

    cases = {
        "assign_cells": lambda impl, name: impl.assign_cells(xs, ys, edges, edges),
        "count_in_rect": lambda impl, name: impl.count_in_rect(xs, ys, 200, 700, 300, 800, False, False),
        "mask_in_rect": lambda impl, name: impl.mask_in_rect(xs, ys, 200, 700, 300, 800, False, False),
        "count (tile-sized x1000)": lambda impl, name: [
            impl.count_in_rect(txs, tys, 200, 700, 300, 800, False, False) for _ in range(1000)
        ],
        "partition_order": lambda impl, name: impl.partition_order(cells[name], 32 * 32),
        "group_stats": lambda impl, name: impl.group_stats(cells[name], 32 * 32, vals),
    }

    print(f"\nkernels on {n:,} points (best of {repeat}):")
    header = f"{'kernel':<26}" + "".join(f"{name:>12}" for name, _ in backends)
    if _ckernels:
        header += f"{'speedup':>10}"
    print(header)
    for label, case in cases.items():
        times = [timeit(lambda impl=impl, name=name: case(impl, name), repeat) for name, impl in backends]
        row = f"{label:<26}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>9.1f}x"
        print(row)


def bench_end_to_end(n: int, repeat: int) -> None:
    import os
    import tempfile

    from tileprobe.ingest import scan_init
    from tileprobe.tile_index import IndexConfig, Rect, initialize
    from tileprobe.workload import gen_dataset

    path = os.path.join(tempfile.mkdtemp(), "bench.csv")
    gen_dataset(seed=3, rows=n, numeric_cols=4, distribution="uniform", out_path=path)
    descriptor, scan = scan_init(path, 0, 1, [2, 3])
    rng = np.random.default_rng(5)
    windows = []
    for _ in range(200):
        x0 = rng.uniform(0, 900)
        y0 = rng.uniform(0, 900)
        windows.append(Rect(x0, x0 + 100, y0, y0 + 100))

    print(f"\nindex build + 200 classifications on {n:,} rows (best of {repeat}):")
    for name in ("python", "c"):
        impl = _py if name == "python" else _ckernels
        if impl is None:
            continue
        import tileprobe.kernels as K

        saved = (K.assign_cells, K.mask_in_rect, K.count_in_rect, K.partition_order, K.group_stats)
        K.assign_cells, K.mask_in_rect, K.count_in_rect = impl.assign_cells, impl.mask_in_rect, impl.count_in_rect
        K.partition_order, K.group_stats = impl.partition_order, impl.group_stats
        try:
            def run():
                index = initialize(descriptor, scan, IndexConfig(initial_grid=32))
                return sum(index.window_count(w) for w in windows)

            t = timeit(run, repeat)
            print(f"  {name:<8} {t * 1e3:>8.1f}ms")
        finally:
            (K.assign_cells, K.mask_in_rect, K.count_in_rect, K.partition_order, K.group_stats) = saved


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=1_000_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _ckernels is None:
        print("compiled backend not built; benchmarking the fallback only")
    bench_kernels(args.points, args.repeat)
    bench_end_to_end(min(args.points, 200_000), max(2, args.repeat // 2))


if __name__ == "__main__":
    main()
