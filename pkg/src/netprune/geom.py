"""Points, weights and hashed uniform grids.

Everything downstream works on :class:`PointSet`, a struct-of-arrays view of
weighted points: an ``(n, d)`` float64 coordinate block, an int64 weight per
row and an optional float payload carried along through merges and nets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .errors import EmptyGridError, InputError

MAX_KEY = 2 ** 62


@dataclass(frozen=True)
class WeightedPoint:
    coords: tuple
    weight: int = 1

    def __post_init__(self):
        if self.weight < 1:
            raise InputError("weights must be positive integers")
        if not all(math.isfinite(c) for c in self.coords):
            raise InputError("coordinates must be finite")


class PointSet:
    """Weighted points stored column-wise."""

    __slots__ = ("coords", "weights", "payload")

    def __init__(self, coords, weights=None, payload=None, validate=True):
        coords = np.ascontiguousarray(coords, dtype=np.float64)
        if coords.ndim == 1:
            coords = coords.reshape(-1, 1)
        n = coords.shape[0]
        if weights is None:
            weights = np.ones(n, dtype=np.int64)
        else:
            weights = np.ascontiguousarray(weights, dtype=np.int64).reshape(-1)
        if payload is not None:
            payload = np.ascontiguousarray(payload, dtype=np.float64)
            if payload.ndim == 1:
                payload = payload.reshape(-1, 1)
        if validate:
            if coords.ndim != 2 or coords.shape[1] < 1:
                raise InputError("coordinates must form an (n, d) array with d >= 1")
            if not np.isfinite(coords).all():
                raise InputError("coordinates must be finite")
            if len(weights) != n:
                raise InputError("one weight per point is required")
            if n and weights.min() < 1:
                raise InputError("weights must be positive integers")
            if payload is not None and payload.shape[0] != n:
                raise InputError("payload rows must match the points")
        self.coords = coords
        self.weights = weights
        self.payload = payload

    @classmethod
    def from_points(cls, points):
        pts = list(points)
        if not pts:
            return cls(np.empty((0, 1)))
        if isinstance(pts[0], WeightedPoint):
            dims = {len(p.coords) for p in pts}
            if len(dims) != 1:
                raise InputError("all points must share one dimension")
            return cls([p.coords for p in pts], [p.weight for p in pts])
        return cls(pts)

    def __len__(self):
        return self.coords.shape[0]

    @property
    def dim(self):
        return self.coords.shape[1]

    @property
    def total_weight(self):
        return int(self.weights.sum())

    def subset(self, index):
        index = np.asarray(index)
        payload = None if self.payload is None else self.payload[index]
        return PointSet(self.coords[index], self.weights[index], payload, validate=False)

    def to_points(self):
        return [WeightedPoint(tuple(c), int(w)) for c, w in zip(self.coords.tolist(), self.weights.tolist())]

    def __repr__(self):
        return f"PointSet(n={len(self)}, d={self.dim}, weight={self.total_weight})"


def as_pointset(points) -> PointSet:
    if isinstance(points, PointSet):
        return points
    return PointSet.from_points(points)


def merge_duplicates(points: PointSet) -> PointSet:
    """Collapse coincident locations into one point with summed weight and payload.

    Rows keep the order of first appearance.
    """
    n = len(points)
    if n <= 1:
        return points
    # +0.0 folds -0.0 onto 0.0 so the bit patterns agree
    bits = np.ascontiguousarray(points.coords + 0.0).view(np.int64)
    order = np.lexsort(bits.T[::-1])
    sorted_bits = bits[order]
    new = np.empty(n, dtype=bool)
    new[0] = True
    new[1:] = np.any(sorted_bits[1:] != sorted_bits[:-1], axis=1)
    if new.all():
        return points
    group_sorted = np.cumsum(new) - 1
    group = np.empty(n, dtype=np.int64)
    group[order] = group_sorted
    first = np.full(group_sorted[-1] + 1, n, dtype=np.int64)
    np.minimum.at(first, group, np.arange(n))
    rank = np.empty_like(first)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    label = rank[group]
    m = len(first)
    weights = np.bincount(label, weights=points.weights, minlength=m).astype(np.int64)
    coords = points.coords[np.sort(first)]
    payload = None
    if points.payload is not None:
        payload = np.zeros((m, points.payload.shape[1]))
        np.add.at(payload, label, points.payload)
    return PointSet(coords, weights, payload, validate=False)


def grid_id(point, sidelength):
    if not sidelength > 0:
        raise InputError("sidelength must be positive")
    key = []
    for c in point:
        if not math.isfinite(c):
            raise InputError("coordinates must be finite")
        scaled = c / sidelength
        if not abs(scaled) < MAX_KEY:
            raise InputError("coordinate too large for the grid key range")
        key.append(math.floor(scaled))
    return tuple(key)


def grid_keys(coords, sidelength):
    if not sidelength > 0 or not math.isfinite(sidelength):
        raise InputError("sidelength must be positive and finite")
    scaled = np.floor(coords / sidelength)
    if scaled.size and np.abs(scaled).max() >= MAX_KEY:
        raise InputError("coordinate too large for the grid key range")
    return scaled.astype(np.int64)


def side_for_diameter(diameter, dim):
    """Sidelength whose cells have Euclidean diameter ``diameter``."""
    return diameter / math.sqrt(dim)


@dataclass
class CellGroups:
    cell_keys: np.ndarray
    cell_start: np.ndarray
    members: np.ndarray
    cell_of: np.ndarray

    def __len__(self):
        return len(self.cell_keys)


def group_rows(keys) -> CellGroups:
    """Group equal key rows; cells come out in lexicographic key order."""
    keys = np.ascontiguousarray(keys, dtype=np.int64)
    n, d = keys.shape
    if n == 0:
        empty = np.empty(0, dtype=np.int64)
        return CellGroups(keys[:0], np.zeros(1, dtype=np.int64), empty, empty.copy())
    lo = keys.min(axis=0)
    span = keys.max(axis=0) - lo + 1
    product = 1
    for s in span.tolist():
        product *= s
    if product < MAX_KEY:
        code = np.zeros(n, dtype=np.int64)
        for j in range(d):
            code = code * int(span[j]) + (keys[:, j] - lo[j])
        order = np.argsort(code, kind="stable")
        code_sorted = code[order]
        new = np.empty(n, dtype=bool)
        new[0] = True
        new[1:] = code_sorted[1:] != code_sorted[:-1]
    else:
        order = np.lexsort(keys.T[::-1])
        sk = keys[order]
        new = np.empty(n, dtype=bool)
        new[0] = True
        new[1:] = np.any(sk[1:] != sk[:-1], axis=1)
    starts = np.flatnonzero(new)
    cell_start = np.append(starts, n).astype(np.int64)
    cell_sorted = np.cumsum(new) - 1
    cell_of = np.empty(n, dtype=np.int64)
    cell_of[order] = cell_sorted
    return CellGroups(keys[order[starts]], cell_start, order.astype(np.int64), cell_of)


_STENCIL_CACHE: dict = {}


def cell_stencil(reach, dim):
    """Integer offsets of every cell whose box lies within ``reach`` cell widths of the origin cell.

    Two cells whose keys differ by ``delta`` are at box distance
    ``side * sqrt(sum(max(0, |delta_i| - 1)^2))``.
    """
    reach2 = reach * reach * (1 + 1e-9) + 1e-12
    key = (round(reach2, 12), dim)
    hit = _STENCIL_CACHE.get(key)
    if hit is not None:
        return hit
    bound = int(math.floor(math.sqrt(reach2))) + 1
    axis = np.arange(-bound, bound + 1, dtype=np.int64)
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    offs = np.stack([g.reshape(-1) for g in grids], axis=1)
    gap = np.maximum(np.abs(offs) - 1, 0)
    keep = (gap * gap).sum(axis=1) <= reach2
    out = np.ascontiguousarray(offs[keep])
    if len(_STENCIL_CACHE) < 256:
        _STENCIL_CACHE[key] = out
    return out


def line_stencil(reach, dim):
    """Stencil split into prefix offsets plus a half-width along the last axis.

    Used by the line-sweep pair counter: cells differing by ``(g, t)`` are within
    reach iff ``|t| <= half`` for the half-width paired with prefix ``g``.
    """
    reach2 = reach * reach * (1 + 1e-9) + 1e-12
    bound = int(math.floor(math.sqrt(reach2))) + 1
    if dim == 1:
        prefixes = np.zeros((1, 0), dtype=np.int64)
        used = np.zeros(1)
    else:
        axis = np.arange(-bound, bound + 1, dtype=np.int64)
        grids = np.meshgrid(*([axis] * (dim - 1)), indexing="ij")
        prefixes = np.stack([g.reshape(-1) for g in grids], axis=1)
        gap = np.maximum(np.abs(prefixes) - 1, 0)
        used = (gap * gap).sum(axis=1).astype(np.float64)
        keep = used <= reach2
        prefixes, used = prefixes[keep], used[keep]
    halves = np.empty(len(used), dtype=np.int64)
    for i, g in enumerate(used.tolist()):
        rest = reach2 - g
        t = int(math.isqrt(int(rest))) if rest >= 1 else 0
        while (t + 1) * (t + 1) <= rest:
            t += 1
        while t > 0 and t * t > rest:
            t -= 1
        halves[i] = t + 1
    return np.ascontiguousarray(prefixes), halves


@dataclass(frozen=True)
class BallRuns:
    """Cells within a radius of each point, stored as runs along grid lines.

    Run ``i`` belongs to point ``point[i]`` and covers last-axis keys
    ``lo[i]..hi[i]`` on line ``line[i]``; lines are numbered in lexicographic
    order of their key prefixes.
    """

    point: np.ndarray
    line: np.ndarray
    lo: np.ndarray
    hi: np.ndarray


def ball_runs(coords, side, radius) -> BallRuns:
    """Every cell of side ``side`` whose box lies within ``radius`` of a point."""
    d = coords.shape[1]
    keys = grid_keys(coords, side)
    prefixes, _ = line_stencil(radius / side, d)
    pt, pid, lo, hi = kernels.ball_intervals(coords, keys, side, prefixes, radius)
    if d == 1 or not len(pt):
        line = np.zeros(len(pt), dtype=np.int64)
    else:
        line = group_rows(keys[pt, :-1] + prefixes[pid]).cell_of
    return BallRuns(pt, line, lo, hi)


def merged_runs(runs: BallRuns):
    """Id per run of the merged segment holding it: runs on one line that
    overlap, directly or through a chain, share an id."""
    if not len(runs.point):
        return np.empty(0, dtype=np.int64)
    order = np.lexsort((runs.lo, runs.line))
    line, lo, hi = runs.line[order], runs.lo[order], runs.hi[order]
    starts = np.flatnonzero(np.r_[True, line[1:] != line[:-1]])
    sizes = np.diff(np.r_[starts, len(hi)])
    base = np.repeat(lo[starts], sizes)
    span = int((hi - base).max()) + 1
    if int(line[-1]) < (1 << 62) // span:
        # lines are sorted, so a running max over line*span + offset never
        # carries a value across a line boundary
        shift = line * span - base
        reach = np.maximum.accumulate(hi + shift) - shift
    else:
        reach = np.empty_like(hi)
        for a, b in zip(starts.tolist(), (starts + sizes).tolist()):
            reach[a:b] = np.maximum.accumulate(hi[a:b])
    fresh = np.r_[True, (line[1:] != line[:-1]) | (lo[1:] > reach[:-1])]
    seg = np.empty(len(order), dtype=np.int64)
    seg[order] = np.cumsum(fresh) - 1
    return seg


def point_box_distance(point, key, sidelength):
    p = np.asarray(point, dtype=np.float64)
    lo = np.asarray(key, dtype=np.float64) * sidelength
    hi = (np.asarray(key, dtype=np.float64) + 1) * sidelength
    gap = np.maximum(lo - p, 0.0) + np.maximum(p - hi, 0.0)
    return float(math.sqrt(float((gap * gap).sum())))


class Grid:
    """Hashed uniform grid over a weighted point set."""

    def __init__(self, points, sidelength):
        points = as_pointset(points)
        if len(points) == 0:
            raise EmptyGridError("cannot build a grid over no points")
        if not sidelength > 0:
            raise InputError("sidelength must be positive")
        self.points = points
        self.sidelength = float(sidelength)
        self.point_keys = grid_keys(points.coords, self.sidelength)
        groups = group_rows(self.point_keys)
        self.cell_keys = groups.cell_keys
        self.cell_start = groups.cell_start
        self.members = groups.members
        self.cell_of = groups.cell_of
        self.cell_weights = np.add.reduceat(points.weights[self.members], self.cell_start[:-1])

    def __len__(self):
        return len(self.cell_keys)

    @cached_property
    def table(self):
        return kernels.CellTable(self.cell_keys)

    @cached_property
    def cells(self):
        """Mapping from key tuple to the list of point indices in that cell."""
        out = {}
        for c, key in enumerate(map(tuple, self.cell_keys.tolist())):
            out[key] = self.members[self.cell_start[c]:self.cell_start[c + 1]].tolist()
        return out

    def cell_weight(self, key):
        c = self.table.find(np.asarray(key, dtype=np.int64))
        return 0 if c < 0 else int(self.cell_weights[c])

    def neighborhood_cells(self, point, r):
        if not r > 0:
            raise InputError("radius must be positive")
        p = np.asarray(point, dtype=np.float64).reshape(1, -1)
        own = grid_keys(p, self.sidelength)
        offsets = cell_stencil(r / self.sidelength, self.points.dim)
        _, cells = kernels.offset_pairs(p, own, self.sidelength, offsets, float(r), self.table)
        found = set(cells.tolist())
        own_cell = self.table.find(own[0])
        if own_cell >= 0:
            found.add(own_cell)
        return [tuple(self.cell_keys[c].tolist()) for c in sorted(found)]


def build_grid(points, sidelength) -> Grid:
    return Grid(points, sidelength)


def sq_norms(diff):
    """Row-wise squared norms, accumulated column by column.

    The summation order matches the compiled kernels so that a distance
    measured here compares consistently with the grid routines.
    """
    acc = np.zeros(diff.shape[0])
    for j in range(diff.shape[1]):
        acc = acc + diff[:, j] * diff[:, j]
    return acc


def nearest_other_distance(coords, index):
    """Distance from row ``index`` to its closest other row, by a linear scan."""
    d2 = sq_norms(coords - coords[index])
    d2[index] = np.inf
    return float(np.sqrt(d2.min()))
