"""k-center clustering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InfeasibleError, InputError
from ..framework import Above, Below, Bounded, NdpInstance, Interval, ndp_solve, prepare, refine_phi
from ..geom import PointSet
from ..nets import compute_net


@dataclass(frozen=True)
class KCenterContext:
    k: int


class KCenter:
    name = "kcenter"

    def phi(self, eps):
        return 4 + eps

    def decide(self, points, r, context, eps):
        k = context.k
        if len(compute_net(points, r)) <= k:
            return Below(r)
        wide = (2 + eps / 2) * r
        if len(compute_net(points, wide)) <= k:
            return Bounded(r / 2, wide)
        return Above(r)

    def prune_context(self, points, close, context):
        # every dropped point becomes a center of its own
        k = context.k - int((~close).sum())
        if k <= 0:
            raise InfeasibleError("no centers left for the remaining points")
        return KCenterContext(k)

    def is_zero(self, points, context):
        return context.k >= len(points)


def kcenter_decider(points, r, k, eps=1.0):
    return KCenter().decide(points, r, KCenterContext(k), eps)


def covering_radius(coords, centers):
    """Largest distance from a row to its closest center row."""
    c = coords[centers]
    best = np.full(len(coords), np.inf)
    for row in c:
        diff = coords - row
        best = np.minimum(best, np.einsum("ij,ij->i", diff, diff))
    return float(np.sqrt(best.max()))


def farthest_first(coords, k, start=0):
    """Greedy farthest-point traversal; a 2-approximation in O(nk)."""
    n = len(coords)
    centers = [start]
    diff = coords - coords[start]
    best = np.einsum("ij,ij->i", diff, diff)
    while len(centers) < min(k, n):
        nxt = int(np.argmax(best))
        if best[nxt] == 0:
            break
        centers.append(nxt)
        diff = coords - coords[nxt]
        best = np.minimum(best, np.einsum("ij,ij->i", diff, diff))
    return np.asarray(centers, dtype=np.int64)


@dataclass
class KCenterResult:
    radius: float
    centers: np.ndarray
    interval: Interval
    trace: object


def kcenter_2approx(points, k, seed=0):
    """Radius within factor two of the optimal k-center radius, plus the centers."""
    pts = prepare(points)
    if k < 1:
        raise InputError("k must be at least 1")
    if k > len(pts):
        raise InputError("k exceeds the number of distinct points")
    problem = KCenter()
    inst = NdpInstance(pts, KCenterContext(k))
    interval, trace = ndp_solve(problem, inst, seed=seed)
    if interval.hi == 0:
        centers = np.arange(len(pts))
        return KCenterResult(0.0, pts.coords[centers], interval, trace)
    interval = refine_phi(problem, inst, interval)
    # a net at twice a certified lower bound covers with radius < 2 opt
    net = compute_net(pts, 2 * interval.lo)
    if len(net) <= k:
        centers = net.centers
    else:
        centers = farthest_first(pts.coords, k)
    radius = covering_radius(pts.coords, centers)
    return KCenterResult(radius, pts.coords[centers], interval, trace)
