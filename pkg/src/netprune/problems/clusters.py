"""Problems driven by sketchable families: smallest enclosing ball of a member
set, smallest connecting radius of a member component, connected clustering
into member clusters, and min-max radius clustering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, InfeasibleError, InputError
from ..framework import Interval, NdpInstance, ndp_solve, prepare, refine_eps
from ..geom import PointSet, as_pointset, ball_runs, side_for_diameter
from ..nets import compute_net
from .base import ProblemBase
from .connectivity import connectivity_labels
from .ranks import SolveResult
from .sketches import PointAttributes, group_sketches


def attach_sketches(points, family, data=None) -> PointSet:
    """Copy of ``points`` carrying the family sketch of each row as payload."""
    pts = as_pointset(points)
    if data is None:
        data = PointAttributes(pts.weights)
    return PointSet(pts.coords, pts.weights, family.sketch_rows(data))


class SketchProblem(ProblemBase):
    def __init__(self, family):
        self.family = family

    def any_single_member(self, points):
        return bool(self.family.member_rows(points.payload).any())

    def all_single_members(self, points):
        return bool(self.family.member_rows(points.payload).all())

    def whole_member(self, points):
        return self.family.member(points.payload.sum(axis=0))


def covered_sums(runs, payload):
    """Summed payload of the points covering each cell where coverage changes.

    Each run adds its point's payload at ``lo`` and removes it past ``hi``;
    a running sum per line, read after the last event at each position, gives
    the total over the points whose runs cover that cell.
    """
    count = len(runs.point)
    line = np.concatenate([runs.line, runs.line])
    pos = np.concatenate([runs.lo, runs.hi + 1])
    rows = payload[runs.point]
    delta = np.concatenate([rows, -rows])
    order = np.lexsort((pos, line))
    line, pos, delta = line[order], pos[order], delta[order]
    running = np.cumsum(delta, axis=0)
    # restart the sum on every line so rounding never drifts across lines
    starts = np.flatnonzero(np.r_[True, line[1:] != line[:-1]])
    before = np.vstack([np.zeros((1, delta.shape[1])), running[starts[1:] - 1]])
    running -= np.repeat(before, np.diff(np.r_[starts, 2 * count]), axis=0)
    last = np.r_[(line[1:] != line[:-1]) | (pos[1:] != pos[:-1]), True]
    return running[last]


class MinBall(SketchProblem):
    """Target is the diameter of the smallest ball enclosing a member set.

    Working with twice the radius keeps far points out of any optimal ball,
    which is what pruning needs.
    """

    name = "min-ball"

    def test(self, points, rho, context, eps):
        half = rho / 2
        side = side_for_diameter(eps * half / 4, points.dim)
        runs = ball_runs(points.coords, side, half)
        if not len(runs.point):
            return False
        return bool(self.family.member_rows(covered_sums(runs, points.payload)).any())

    def is_zero(self, points, context):
        return self.any_single_member(points)


class MinComponent(SketchProblem):
    name = "min-component"

    def test(self, points, rho, context, eps):
        labels = connectivity_labels(points.coords, rho, eps)
        sums = group_sketches(points.payload, labels, int(labels.max()) + 1)
        return bool(self.family.member_rows(sums).any())

    def is_zero(self, points, context):
        return self.any_single_member(points)


class _AllMemberPrune(SketchProblem):
    def prune_context(self, points, close, context):
        far = points.payload[~close]
        if len(far) and not self.family.member_rows(far).all():
            raise ContractError("an isolated point is not a member on its own")
        return context

    def is_zero(self, points, context):
        return self.all_single_members(points)


class ConnectedCluster(_AllMemberPrune):
    name = "connected-cluster"

    def test(self, points, rho, context, eps):
        labels = connectivity_labels(points.coords, rho, eps)
        sums = group_sketches(points.payload, labels, int(labels.max()) + 1)
        return bool(self.family.member_rows(sums).all())


def net_clusters(points, rho):
    net = compute_net(points, 4 * rho, nearest=True)
    return net


class MinMaxCluster(_AllMemberPrune):
    """Partition into member clusters minimizing the largest cluster radius,
    with each cluster's center drawn from the cluster."""

    name = "minmax-cluster"

    def factors(self, eps):
        return 4.0, 4.0 + eps

    def test(self, points, rho, context, eps):
        net = net_clusters(points, rho)
        sums = group_sketches(points.payload, net.assignment, len(net))
        return bool(self.family.member_rows(sums).all())


def _screen_whole(problem, pts):
    if not problem.whole_member(pts):
        raise InfeasibleError("the whole point set is not a member of the family")


def _prepare(points, family, data):
    pts = prepare(attach_sketches(points, family, data))
    if len(pts) < 1:
        raise InputError("empty point set")
    return pts


def _run(problem, pts, eps, seed, sampler):
    inst = NdpInstance(pts, None)
    interval, trace = ndp_solve(problem, inst, seed=seed, radius_sampler=sampler)
    if interval.hi == 0:
        return interval, trace, True
    return refine_eps(problem, inst, interval, eps), trace, False


def min_ball(points, family, data=None, eps=0.1, seed=0, sampler=None):
    """(1+eps)-approximate radius of the smallest ball holding a member set."""
    problem = MinBall(family)
    pts = _prepare(points, family, data)
    _screen_whole(problem, pts)
    interval, trace, zero = _run(problem, pts, eps, seed, sampler)
    radius = Interval(interval.lo / 2, interval.hi / 2)
    return SolveResult(radius.hi, radius, trace, "zero screen" if zero else "")


def min_component(points, family, data=None, eps=0.1, seed=0, sampler=None):
    """(1+eps)-approximate smallest r such that some r-connected component is a member."""
    problem = MinComponent(family)
    pts = _prepare(points, family, data)
    _screen_whole(problem, pts)
    interval, trace, zero = _run(problem, pts, eps, seed, sampler)
    return SolveResult(interval.hi, interval, trace, "zero screen" if zero else "")


def connected_cluster(points, family, data=None, eps=0.1, seed=0, sampler=None):
    """(1+eps)-approximate smallest r such that every r-connected component is a member."""
    problem = ConnectedCluster(family)
    pts = _prepare(points, family, data)
    _screen_whole(problem, pts)
    interval, trace, zero = _run(problem, pts, eps, seed, sampler)
    return SolveResult(interval.hi, interval, trace, "zero screen" if zero else "")


@dataclass
class ClusteringResult(SolveResult):
    centers: np.ndarray = None
    labels: np.ndarray = None


def minmax_cluster(points, family, data=None, eps=0.1, seed=0, sampler=None):
    """Clustering into member clusters with radius at most (4+eps) times optimal."""
    problem = MinMaxCluster(family)
    pts = _prepare(points, family, data)
    _screen_whole(problem, pts)
    inst = NdpInstance(pts, None)
    interval, trace = ndp_solve(problem, inst, seed=seed, radius_sampler=sampler)
    if interval.hi == 0:
        idx = np.arange(len(pts))
        return ClusteringResult(0.0, interval, trace, "zero screen", pts.coords, idx)
    # optimum >= low throughout; the test holds at high
    low, high = interval.lo, interval.hi * (1 + eps / 4)
    while high > low * (1 + eps / 4):
        mid = (low * high) ** 0.5
        if problem.test(pts, mid, None, eps):
            high = mid
        else:
            low = mid
    net = net_clusters(pts, high)
    sums = group_sketches(pts.payload, net.assignment, len(net))
    if not family.member_rows(sums).all():
        raise ContractError("final clustering has a non-member cluster")
    diff = pts.coords - net.net.coords[net.assignment]
    value = float(np.sqrt(np.einsum("ij,ij->i", diff, diff).max()))
    return ClusteringResult(value, Interval(interval.lo, interval.hi), trace, "",
                            net.net.coords, net.assignment)
