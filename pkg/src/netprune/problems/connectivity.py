"""Approximate connectivity clustering and the k-th longest MST edge."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..errors import InfeasibleError, InputError
from ..framework import prepare
from ..geom import as_pointset, ball_runs, merged_runs, side_for_diameter
from .base import ProblemBase
from .ranks import RankContext, _check_rank, _solve_eps


@dataclass
class Partition:
    labels: np.ndarray

    @property
    def count(self):
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def clusters(self):
        order = np.argsort(self.labels, kind="stable")
        cuts = np.flatnonzero(np.diff(self.labels[order])) + 1
        return [c.tolist() for c in np.split(order, cuts)] if len(order) else []


def first_seen_labels(labels):
    """Relabel so cluster ids follow the order of first appearance."""
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inverse.reshape(-1)]


def connectivity_labels(coords, r, eps):
    """Cluster id per row for a partition sandwiched between threshold-graph
    components at ``r`` and at ``(1 + eps/4) r``.

    Each point marks the cells of diameter ``eps*r/4`` within ``r/2`` of it;
    points sharing a marked cell are joined.
    """
    n, d = coords.shape
    if n == 0:
        return np.empty(0, dtype=np.int64)
    if n == 1:
        return np.zeros(1, dtype=np.int64)
    side = side_for_diameter(eps * r / 4, d)
    runs = ball_runs(coords, side, r / 2)
    # overlapping runs on one line share a marked cell, so joining points
    # through merged segments joins exactly the points sharing a cell
    node = merged_runs(runs) + n
    total = n + (int(node.max()) - n + 1 if len(node) else 0)
    graph = coo_matrix((np.ones(len(node), dtype=np.int8), (runs.point, node)), shape=(total, total))
    _, labels = connected_components(graph, directed=False)
    return first_seen_labels(labels[:n])


def connectivity_partition(points, r, eps) -> Partition:
    if not r > 0 or not eps > 0:
        raise InputError("r and eps must be positive")
    pts = as_pointset(points)
    return Partition(connectivity_labels(pts.coords, r, eps))


def cluster_count(points, rho, eps):
    return int(connectivity_labels(points.coords, rho, eps).max()) + 1


class MstKthEdge(ProblemBase):
    """k-th longest edge of the minimum spanning tree over all weight units."""

    name = "mst-kth-edge"

    def test(self, points, rho, context, eps):
        return cluster_count(points, rho, eps) <= context.k

    def prune_context(self, points, close, context):
        k = context.k - int((~close).sum())
        if k < 1:
            raise InfeasibleError("rank fell below 1 after pruning")
        return RankContext(k)

    def is_zero(self, points, context):
        return context.k >= len(points)


def mst_kth_edge_decider(points, r, k, eps):
    return MstKthEdge().decide(points, r, RankContext(k), eps)


def mst_kth_edge(points, k, eps=0.1, seed=0, shortest=False, sampler=None):
    """(1+eps)-approximate k-th longest (or k-th shortest) MST edge."""
    pts = prepare(points)
    n = pts.total_weight
    if n < 2:
        raise InputError("a spanning tree needs at least two points")
    _check_rank(k, n - 1, "MST edges")
    rank = n - k if shortest else k
    return _solve_eps(MstKthEdge(), pts, RankContext(rank), eps, seed, sampler)
