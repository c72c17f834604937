"""r-nets and far/close splitting in expected linear time."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InputError, UndefinedDistanceError
from .geom import PointSet, as_pointset, cell_stencil, grid_keys, group_rows


@dataclass
class NetResult:
    net: PointSet
    centers: np.ndarray      # input row of each net point
    assignment: np.ndarray   # net index of each input row
    radius: float

    def __len__(self):
        return len(self.centers)


@dataclass
class FarCloseSplit:
    close: np.ndarray        # boolean mask over the input rows
    nearest: np.ndarray      # distance to the nearest other location, inf when >= r

    @property
    def far(self):
        return ~self.close


def _check_radius(r):
    if not (r > 0) or not math.isfinite(r):
        raise InputError(f"radius must be positive and finite, got {r!r}")


def _indexed(coords, side):
    keys = grid_keys(coords, side)
    groups = group_rows(keys)
    table = kernels.CellTable(groups.cell_keys)
    return keys, groups, table


def compute_net(points, r, nearest=False) -> NetResult:
    """Greedy r-net in input scan order.

    Each point joins the first net point that marked it (distance < r). With
    ``nearest=True`` a second pass moves every point to its closest net point.
    Net weights and payloads are the sums over the assigned points.
    """
    points = as_pointset(points)
    _check_radius(r)
    if len(points) == 0:
        raise InputError("cannot build a net over no points")
    d = points.dim
    # cell diameter r/2 keeps at most one net point per cell
    side = r / (2.0 * math.sqrt(d))
    keys, groups, table = _indexed(points.coords, side)
    offsets = cell_stencil(r / side, d)
    assign, centers = kernels.net_scan(points.coords, keys, table, groups.cell_start,
                                       groups.members, offsets, float(r))
    if nearest:
        assign = nearest_net_assignment(points.coords, points.coords[centers], r)
    return NetResult(_collect(points, centers, assign), centers, assign, float(r))


def nearest_net_assignment(coords, net_coords, r):
    """Index of the closest net point for every row; the net must cover within ``r``."""
    d = coords.shape[1]
    side = r / (2.0 * math.sqrt(d))
    nkeys, groups, table = _indexed(net_coords, side)
    offsets = cell_stencil(r / side, d)
    qkeys = grid_keys(coords, side)
    qself = np.full(len(coords), -1, dtype=np.int64)
    _, where = kernels.nearest_in_cells(coords, qkeys, qself, net_coords, table, groups.cell_start,
                                        groups.members, offsets, float(r), False)
    if (where < 0).any():
        raise InputError("net does not cover every point within the radius")
    return where


def _collect(points, centers, assign):
    m = len(centers)
    weights = np.bincount(assign, weights=points.weights, minlength=m).astype(np.int64)
    payload = None
    if points.payload is not None:
        payload = np.zeros((m, points.payload.shape[1]))
        np.add.at(payload, assign, points.payload)
    return PointSet(points.coords[centers], weights, payload, validate=False)


def del_far(points, r, ignore_weights=False) -> FarCloseSplit:
    """Split rows into r-close (nearest other unit closer than r) and r-far.

    A row of weight two or more has a coincident copy and is always close,
    unless ``ignore_weights`` asks to treat every row as a single location.
    """
    points = as_pointset(points)
    _check_radius(r)
    n = len(points)
    units = n if ignore_weights else points.total_weight
    if units < 2:
        raise UndefinedDistanceError("nearest-neighbor distance needs at least two points")
    d = points.dim
    side = r / (2.0 * math.sqrt(d))
    keys, groups, table = _indexed(points.coords, side)
    offsets = cell_stencil(r / side, d)
    qself = np.arange(n, dtype=np.int64)
    best, _ = kernels.nearest_in_cells(points.coords, keys, qself, points.coords, table,
                                       groups.cell_start, groups.members, offsets, float(r), False)
    best = np.where(best < r, best, np.inf)
    close = best < r
    if not ignore_weights:
        heavy = points.weights >= 2
        close |= heavy
        best = np.where(heavy, 0.0, best)
    return FarCloseSplit(close, best)
