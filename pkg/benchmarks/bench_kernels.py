"""Compiled vs numpy kernels on the same uniform inputs.

    python3 benchmarks/bench_kernels.py --n 20000 --repeat 3
"""

import argparse
import math
import time

import numpy as np

from netprune import _pykernels
from netprune.geom import cell_stencil, grid_keys, group_rows, line_stencil, side_for_diameter

try:
    from netprune import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases(mod, coords, r):
    d = coords.shape[1]
    side = r / (2 * math.sqrt(d))
    keys = grid_keys(coords, side)
    groups = group_rows(keys)
    table = mod.CellTable(groups.cell_keys)
    offsets = cell_stencil(r / side, d)
    qself = np.arange(len(coords), dtype=np.int64)
    fine = side_for_diameter(0.25 * r / 8, d)
    fgroups = group_rows(grid_keys(coords, fine))
    fweights = np.diff(fgroups.cell_start)
    prefixes, halves = line_stencil(r / fine, d)
    mark = side_for_diameter(0.25 * r / 4, d)
    mkeys = grid_keys(coords, mark)
    mprefixes, _ = line_stencil(r / 2 / mark, d)
    return {
        "net_scan": lambda: mod.net_scan(coords, keys, table, groups.cell_start, groups.members, offsets, r),
        "nearest_in_cells": lambda: mod.nearest_in_cells(coords, keys, qself, coords, table,
                                                         groups.cell_start, groups.members,
                                                         offsets, r, False),
        "offset_pairs": lambda: mod.offset_pairs(coords, keys, side, offsets, r, table),
        "pair_weight_sum": lambda: mod.pair_weight_sum(fgroups.cell_keys, fweights, prefixes, halves),
        "ball_intervals": lambda: mod.ball_intervals(coords, mkeys, mark, mprefixes, r / 2),
        "cell_table": lambda: mod.CellTable(groups.cell_keys).lookup(keys),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=20000)
    parser.add_argument("--d", type=int, default=2)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    coords = np.random.default_rng(args.seed).random((args.n, args.d))
    r = 2.0 / math.sqrt(args.n)
    mods = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    results = {name: cases(mod, coords, r) for name, mod in mods}
    print(f"n={args.n} d={args.d} r={r:.3g}")
    print(f"{'kernel':<18}" + "".join(f"{name:>12}" for name, _ in mods) + f"{'speedup':>10}")
    for kernel in results["python"]:
        times = [best_of(results[name][kernel], args.repeat) for name, _ in mods]
        speed = f"{times[0] / times[-1]:>9.1f}x" if len(times) > 1 else ""
        print(f"{kernel:<18}" + "".join(f"{t:>11.4f}s" for t in times) + speed)


if __name__ == "__main__":
    main()
