"""Rank-valued distance problems: k-th pairwise distance, k-th m-NN distance,
bichromatic nearest distances, and the exact k-th nearest-neighbor distance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import InfeasibleError, InputError
from ..framework import NdpInstance, Interval, ndp_solve, prepare, refine_eps
from ..geom import cell_stencil, grid_keys, group_rows, line_stencil, side_for_diameter
from .base import ProblemBase


@dataclass(frozen=True)
class RankContext:
    k: int
    m: int = 1


@dataclass
class SolveResult:
    value: float
    interval: Interval
    trace: object
    note: str = ""


def _grid(coords, side):
    keys = grid_keys(coords, side)
    return keys, group_rows(keys)


def pair_count_within(points, rho, eps):
    """Unordered unit pairs counted by a grid of cell diameter ``eps * rho / 8``.

    Every pair at distance <= rho is counted; every counted pair is at
    distance <= (1 + eps/4) * rho. Coincident units count as pairs.
    """
    d = points.dim
    side = side_for_diameter(eps * rho / 8, d)
    keys, groups = _grid(points.coords, side)
    cell_w = np.add.reduceat(points.weights[groups.members], groups.cell_start[:-1])
    prefixes, halves = line_stencil(rho / side, d)
    total = kernels.pair_weight_sum(groups.cell_keys, cell_w, prefixes, halves)
    return (total - points.total_weight) // 2


def coincident_pairs(weights):
    w = weights.astype(np.int64)
    return int((w * (w - 1) // 2).sum())


class KthDistance(ProblemBase):
    name = "kth-dist"

    def test(self, points, rho, context, eps):
        return pair_count_within(points, rho, eps) >= context.k

    def prune_context(self, points, close, context):
        far_w = points.weights[~close]
        k = context.k - coincident_pairs(far_w)
        if k < 1:
            raise InfeasibleError("rank fell below 1 after pruning")
        return RankContext(k, context.m)

    def is_zero(self, points, context):
        return context.k <= coincident_pairs(points.weights)


def kth_distance_decider(points, r, k, eps):
    return KthDistance().decide(points, r, RankContext(k), eps)


def neighbor_weight(points, rho, eps):
    """Per point, the weight registered in its cell from points within ``rho`` of the cell box.

    Cells have diameter ``eps * rho / 4``. The count includes the point itself
    and every unit within ``rho`` of it, and nothing beyond ``(1 + eps/4) * rho``.
    """
    d = points.dim
    side = side_for_diameter(eps * rho / 4, d)
    keys, groups = _grid(points.coords, side)
    table = kernels.CellTable(groups.cell_keys)
    offsets = cell_stencil(rho / side, d)
    pt, cell = kernels.offset_pairs(points.coords, keys, side, offsets, float(rho), table)
    reg = np.bincount(cell, weights=points.weights[pt], minlength=len(groups)).astype(np.int64)
    return reg[groups.cell_of], (pt, cell, groups)


class KthMNN(ProblemBase):
    name = "kth-mnn"

    def test(self, points, rho, context, eps):
        reg, _ = neighbor_weight(points, rho, eps)
        votes = points.weights[reg - 1 >= context.m].sum()
        return int(votes) >= context.k

    def prune_context(self, points, close, context):
        far_w = points.weights[~close]
        k = context.k - int(far_w[far_w >= context.m + 1].sum())
        if k < 1:
            raise InfeasibleError("rank fell below 1 after pruning")
        return RankContext(k, context.m)

    def is_zero(self, points, context):
        w = points.weights
        return int(w[w >= context.m + 1].sum()) >= context.k


def kth_mnn_decider(points, r, k, m, eps):
    return KthMNN().decide(points, r, RankContext(k, m), eps)


class BichromaticNN(ProblemBase):
    """k-th smallest distance from a red unit to its nearest blue unit.

    Colors travel in the payload as ``(red count, blue count)`` columns.
    """

    name = "bichromatic-nn"

    def test(self, points, rho, context, eps):
        d = points.dim
        red = points.payload[:, 0]
        blue = points.payload[:, 1]
        side = side_for_diameter(eps * rho / 4, d)
        keys, groups = _grid(points.coords, side)
        table = kernels.CellTable(groups.cell_keys)
        offsets = cell_stencil(rho / side, d)
        pt, cell = kernels.offset_pairs(points.coords, keys, side, offsets, float(rho), table)
        reg = np.bincount(cell, weights=blue[pt], minlength=len(groups))
        votes = red[reg[groups.cell_of] >= 1].sum()
        return votes >= context.k

    def is_zero(self, points, context):
        red, blue = points.payload[:, 0], points.payload[:, 1]
        return red[blue > 0].sum() >= context.k


def _check_rank(k, size, what):
    if not (1 <= k <= size):
        raise InputError(f"k must lie in [1, {size}] for {what}, got {k}")


def _solve_eps(problem, pts, context, eps, seed, sampler=None):
    if not 0 < eps:
        raise InputError("eps must be positive")
    inst = NdpInstance(pts, context)
    interval, trace = ndp_solve(problem, inst, seed=seed, radius_sampler=sampler)
    if interval.hi == 0:
        return SolveResult(0.0, interval, trace, "zero screen")
    interval = refine_eps(problem, inst, interval, eps)
    return SolveResult(interval.hi, interval, trace)


def kth_distance(points, k, eps=0.1, seed=0, sampler=None):
    """(1+eps)-approximate k-th smallest pairwise distance (zero distances included)."""
    pts = prepare(points)
    n = pts.total_weight
    _check_rank(k, n * (n - 1) // 2, "pairwise distances")
    return _solve_eps(KthDistance(), pts, RankContext(k), eps, seed, sampler)


def kth_mnn(points, k, m=1, eps=0.1, seed=0, sampler=None):
    """(1+eps)-approximate k-th smallest m-th nearest-neighbor distance."""
    pts = prepare(points)
    n = pts.total_weight
    if m < 1:
        raise InputError("m must be at least 1")
    if m >= n:
        raise InfeasibleError("every m-th neighbor distance is infinite when m >= n")
    _check_rank(k, n, "m-NN distances")
    return _solve_eps(KthMNN(), pts, RankContext(k, m), eps, seed, sampler)


def kth_bichromatic(points, colors, k, eps=0.1, seed=0, sampler=None):
    """(1+eps)-approximate k-th smallest red-to-blue nearest distance.

    ``colors`` is a 0/1 vector (0 red, 1 blue) aligned with the input rows.
    """
    from ..geom import PointSet, as_pointset
    raw = as_pointset(points)
    colors = np.asarray(colors).reshape(-1)
    if len(colors) != len(raw):
        raise InputError("one color per point is required")
    payload = np.stack([(colors == 0) * raw.weights, (colors == 1) * raw.weights], axis=1).astype(float)
    pts = prepare(PointSet(raw.coords, raw.weights, payload))
    red, blue = pts.payload[:, 0].sum(), pts.payload[:, 1].sum()
    if blue < 1:
        raise InfeasibleError("no blue points")
    _check_rank(k, int(red), "red points")
    return _solve_eps(BichromaticNN(), pts, RankContext(k), eps, seed, sampler)


def exact_kth_nn(points, k, seed=0, sampler=None):
    """Exact k-th smallest nearest-neighbor distance over all weight units."""
    pts = prepare(points)
    n = pts.total_weight
    if n < 2:
        raise InputError("nearest-neighbor distances need at least two points")
    _check_rank(k, n, "nearest-neighbor distances")
    w = pts.weights
    heavy_units = int(w[w >= 2].sum())
    if k <= heavy_units:
        return SolveResult(0.0, Interval(0.0, 0.0), None, "zero screen")
    approx = _solve_eps(KthMNN(), pts, RankContext(k, 1), 1.0, seed, sampler)
    r = approx.interval.hi
    values, below = _sharp_nn(pts, r)
    rank = k - below
    if not (1 <= rank <= len(values)):
        raise InfeasibleError("rank bookkeeping failed; approximate bracket was wrong")
    value = float(np.partition(values, rank - 1)[rank - 1])
    return SolveResult(value, approx.interval, approx.trace)


def _sharp_nn(pts, r):
    """Exact NN distances of points alone in a cell of diameter r/4.

    Returns the exact values (inf when beyond ``r``) and the weight of the
    remaining units, all of which sit within ``r/4`` of another unit.
    """
    d = pts.dim
    side = side_for_diameter(r / 4, d)
    keys, groups = _grid(pts.coords, side)
    counts = np.diff(groups.cell_start)
    lonely = (counts[groups.cell_of] == 1) & (pts.weights == 1)
    below = int(pts.weights[~lonely].sum())
    idx = np.flatnonzero(lonely)
    table = kernels.CellTable(groups.cell_keys)
    offsets = cell_stencil(r / side, d)
    dist, _ = kernels.nearest_in_cells(pts.coords[idx], keys[idx], idx, pts.coords, table,
                                       groups.cell_start, groups.members, offsets, float(r), False)
    return dist, below


def furthest_nn(points, seed=0, sampler=None):
    pts = prepare(points)
    return exact_kth_nn(pts, pts.total_weight, seed=seed, sampler=sampler)


def closest_pair(points, seed=0, sampler=None):
    pts = prepare(points)
    if pts.total_weight < 2:
        raise InputError("closest pair needs at least two points")
    return exact_kth_nn(pts, 1, seed=seed, sampler=sampler)
