"""Middle-rank nearest-neighbor distances with high-probability linear time.

The expected-time driver probes with the nearest-neighbor distance of one random
point, which is only good in expectation. The routines here find, in linear
time with high probability, a nearest-neighbor distance whose rank among all
nearest-neighbor distances is bounded away from both ends. Plugged into the
driver as its probe radius, this makes each round shrink the input by a
constant fraction with high probability.

All routines treat the input rows as distinct locations and ignore weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .errors import InputError, RetrySignal
from .framework import Above, Below, Bounded
from .geom import PointSet, as_pointset, cell_stencil, grid_keys, group_rows, side_for_diameter, sq_norms
from .nets import compute_net
from .problems.connectivity import connectivity_labels


@dataclass(frozen=True)
class HpConstants:
    sample_x: float = 4.0        # size factor of the query sample
    sample_s: float = 8.0        # size factor of the reference sample
    component_cap: float = 16.0  # largest cluster size kept, in units of ln^2 n
    probes: float = 8.0          # number of probes, in units of ln n
    approx: float = 8.0          # factor handed to the exact sharpening pass
    brute_below: int = 8
    retries: int = 10

    def __post_init__(self):
        for name in ("sample_x", "sample_s", "component_cap", "probes", "approx"):
            if getattr(self, name) < 1:
                raise InputError(f"{name} must be at least 1")


DEFAULTS = HpConstants()


def log_sq(n):
    return math.ceil(math.log(n) ** 2)


def _coords(points):
    return as_pointset(points).coords


def _nn_all(coords):
    tree = cKDTree(coords)
    dist, _ = tree.query(coords, k=2)
    return dist[:, 1]


def brute_median_nn(points):
    coords = _coords(points)
    values = np.sort(_nn_all(coords))
    return float(values[(len(values) - 1) // 2])


def nested_side(side):
    """Largest power of two not above ``side``."""
    _, exponent = math.frexp(side)
    return math.ldexp(1.0, exponent - 1)


def pairs_near(coords, rho):
    """Half the number of ordered (point, other point) pairs found in cells within ``rho``.

    Cells have diameter at most ``rho``; every pair closer than ``rho`` is
    counted and no pair farther than ``2 rho``. The sidelength is snapped to a
    power of two, so grids for different radii nest and the count can only
    grow with ``rho``.
    """
    n, d = coords.shape
    side = nested_side(side_for_diameter(rho, d))
    keys = grid_keys(coords, side)
    groups = group_rows(keys)
    table = kernels.CellTable(groups.cell_keys)
    counts = np.diff(groups.cell_start)
    offsets = cell_stencil(rho / side, d)
    pt, cell = kernels.offset_pairs(coords, keys, side, offsets, float(rho), table)
    seen = counts[cell].sum() - n
    return seen / 2


def decider_m(points, r, alpha):
    """Three-way comparison of ``r`` with the rank ``floor(alpha n)`` nearest-neighbor distance.

    ``Above(r)`` reports that ``r`` is below that distance, ``Below(r)`` that
    the distance is at most ``r``, ``Bounded`` that it lies near ``[r/3, 3r]``.
    The test counts close pairs rather than points, and a pair stands for one
    or two points, so each answer holds up to a factor of two.
    """
    coords = _coords(points)
    n = len(coords)
    t = math.floor(alpha * n)
    if n < 2:
        raise InputError("need at least two points")
    if t < 1:
        raise InputError("rank floor(alpha * n) must be at least 1")
    if pairs_near(coords, r) < t:
        return Above(r)
    if pairs_near(coords, r / 3) >= t:
        return Below(r)
    return Bounded(r / 3, 3 * r)


def est_log_dist(points, constants=DEFAULTS, seed=0):
    """Quarter-rank distance from a small query sample to a large reference sample."""
    coords = _coords(points)
    n = len(coords)
    if n < 2:
        raise InputError("need at least two points")
    rng = np.random.default_rng(seed)
    ln = math.log(n)
    nx = min(n, math.ceil(constants.sample_x * ln))
    ns = min(n, math.ceil(constants.sample_s * n / ln))
    xs = rng.choice(n, nx, replace=False)
    ss = rng.choice(n, ns, replace=False)
    ref = coords[ss]
    values = np.empty(nx)
    for i, x in enumerate(xs.tolist()):
        d2 = sq_norms(ref - coords[x])
        d2[ss == x] = np.inf
        values[i] = math.sqrt(d2.min())
    values.sort()
    value = float(values[max(1, nx // 4) - 1])
    if not math.isfinite(value):
        return brute_median_nn(coords)
    return value


def low_spread(points, r, big_r, constants=DEFAULTS, seed=0):
    """Exact nearest-neighbor distance of a point near rank 5/8.

    Works on an ``r/8`` net; valid when the middle nearest-neighbor distances
    lie in ``[r, big_r]`` and ``big_r / r`` is polylogarithmic.
    """
    coords = _coords(points)
    n, d = coords.shape
    rng = np.random.default_rng(seed)
    net = compute_net(PointSet(coords), r / 8)
    ncoords = net.net.coords
    nweights = net.net.weights
    keys = grid_keys(ncoords, big_r)
    groups = group_rows(keys)
    table = kernels.CellTable(groups.cell_keys)
    count = max(1, math.ceil(constants.probes * math.log(n)))
    pick = rng.choice(len(ncoords), count, replace=True, p=nweights / nweights.sum())
    approx = np.zeros(count)
    light = nweights[pick] == 1
    if light.any():
        idx = pick[light]
        offsets = cell_stencil(2 * big_r / big_r, d)
        dist, _ = kernels.nearest_in_cells(ncoords[idx], keys[idx], idx, ncoords, table,
                                           groups.cell_start, groups.members, offsets,
                                           2 * big_r, False)
        approx[light] = dist
    order = np.argsort(approx, kind="stable")
    chosen = order[max(1, math.floor(5 * count / 8)) - 1]
    if not math.isfinite(approx[chosen]):
        raise RetrySignal("sampled point has no neighbor within the search radius")
    p = net.centers[pick[chosen]]
    d2 = sq_norms(coords - coords[p])
    d2[p] = np.inf
    return float(math.sqrt(d2.min()))


def small_comp(nu, points, constants=DEFAULTS, seed=0):
    """Median nearest-neighbor distance over points sampled from small clusters."""
    coords = _coords(points)
    n = len(coords)
    rng = np.random.default_rng(seed)
    m = log_sq(n)
    rho = nu / (8 * m)
    labels = connectivity_labels(coords, rho, 1.0)
    sizes = np.bincount(labels)
    size_of = sizes[labels]
    pool = np.flatnonzero((size_of >= 2) & (size_of <= constants.component_cap * m))
    if not len(pool):
        raise RetrySignal("no small non-singleton clusters")
    count = max(1, math.ceil(constants.probes * math.log(n)))
    pick = rng.choice(pool, count, replace=True)
    order = np.argsort(labels, kind="stable")
    starts = np.concatenate([[0], np.cumsum(sizes)])
    values = np.empty(count)
    for i, p in enumerate(pick.tolist()):
        c = labels[p]
        mates = order[starts[c]:starts[c + 1]]
        d2 = sq_norms(coords[mates] - coords[p])
        d2[mates == p] = np.inf
        values[i] = math.sqrt(d2.min())
    values.sort()
    return float(values[(count - 1) // 2])


@dataclass
class MidNN:
    value: float
    branch: str
    attempts: int


def _mid_nn_once(coords, constants, rng):
    n = len(coords)
    nu = est_log_dist(coords, constants, int(rng.integers(2 ** 63)))
    if not nu > 0:
        raise RetrySignal("degenerate sample distance")
    first = decider_m(coords, nu, 3 / 4)
    if isinstance(first, Bounded):
        return math.sqrt(first.lo * first.hi), "bounded-3/4"
    if isinstance(first, Above):
        # a good sample distance is never below the 1/8 rank
        if isinstance(decider_m(coords, nu, 1 / 8), Above):
            raise RetrySignal("sample distance fell below the low rank")
        return nu, "sample"
    small = nu / (64 * log_sq(n))
    second = decider_m(coords, small, 1 / 2)
    if isinstance(second, Bounded):
        return math.sqrt(second.lo * second.hi), "bounded-1/2"
    if isinstance(second, Above):
        return low_spread(coords, small / 4, 4 * nu, constants, int(rng.integers(2 ** 63))), "low-spread"
    return small_comp(nu, coords, constants, int(rng.integers(2 ** 63))), "small-comp"


def mid_nn_detail(points, constants=DEFAULTS, seed=0) -> MidNN:
    coords = _coords(points)
    n = len(coords)
    if n < 2:
        raise InputError("need at least two points")
    if n < constants.brute_below:
        return MidNN(brute_median_nn(coords), "brute", 0)
    rng = np.random.default_rng(seed)
    for attempt in range(1, constants.retries + 1):
        try:
            value, branch = _mid_nn_once(coords, constants, rng)
            return MidNN(value, branch, attempt)
        except RetrySignal:
            continue
    return MidNN(brute_median_nn(coords), "fallback", constants.retries)


def mid_nn(points, constants=DEFAULTS, seed=0):
    """A value within a constant factor of some middle-rank nearest-neighbor distance."""
    return mid_nn_detail(points, constants, seed).value


def sharpen_to_exact(coords, x, factor):
    """Exact nearest-neighbor distance closest to the median rank among those near ``x``.

    Sweeps radii ``x/factor, 2x/factor, ...`` up to ``factor * x``. At each radius a
    grid of cell diameter radius/4 gives exact distances for points alone in
    their cell, so every nearest-neighbor distance in the swept range is found
    exactly, and the number of smaller ones is known.
    """
    n, d = coords.shape
    radius = x / factor
    floor_value = radius / 4
    exact = np.full(n, np.nan)
    below = 0
    pending = np.arange(n)
    first = True
    while len(pending):
        side = side_for_diameter(radius / 4, d)
        keys = grid_keys(coords, side)
        groups = group_rows(keys)
        table = kernels.CellTable(groups.cell_keys)
        if first:
            counts = np.diff(groups.cell_start)
            alone = counts[groups.cell_of[pending]] == 1
            below = int((~alone).sum())
            pending = pending[alone]
            first = False
        offsets = cell_stencil(radius / side, d)
        dist, _ = kernels.nearest_in_cells(coords[pending], keys[pending], pending, coords, table,
                                           groups.cell_start, groups.members, offsets,
                                           float(radius), False)
        found = np.isfinite(dist)
        exact[pending[found]] = dist[found]
        pending = pending[~found]
        if radius >= factor * x:
            break
        radius *= 2
    known = np.sort(exact[np.isfinite(exact)])
    ranks = below + np.arange(1, len(known) + 1)
    usable = known >= floor_value
    if not usable.any():
        return None
    gap = np.abs(ranks[usable] - n / 2)
    return float(known[usable][int(np.argmin(gap))])


def mid_nn_exact(points, constants=DEFAULTS, seed=0):
    """An exact nearest-neighbor distance of middle rank."""
    coords = _coords(points)
    if len(coords) < constants.brute_below:
        return brute_median_nn(coords)
    x = mid_nn(coords, constants, seed)
    value = sharpen_to_exact(coords, x, constants.approx)
    if value is None:
        return brute_median_nn(coords)
    return value


def hp_radius_sampler(constants=DEFAULTS):
    """Probe-radius hook for the driver that uses :func:`mid_nn_exact`."""

    def sample(points, rng):
        return mid_nn_exact(points, constants, int(rng.integers(2 ** 63)))

    return sample


def sample_rank_value(values, t, alpha, seed=0, replace=True):
    """Rank ``floor(alpha t)`` element of a size-``t`` uniform sample of ``values``."""
    values = np.asarray(values)
    n = len(values)
    rank = math.floor(alpha * t)
    if t < 1 or rank < 1:
        raise InputError("floor(alpha * t) must be at least 1")
    if not replace and t == n:
        sample = values
    else:
        if not replace and t > n:
            raise InputError("sample larger than the population")
        rng = np.random.default_rng(seed)
        sample = values[rng.choice(n, t, replace=replace)]
    return np.partition(sample, rank - 1)[rank - 1]
