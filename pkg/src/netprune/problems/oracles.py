"""Brute-force reference answers.

These are quadratic or exhaustive on purpose and share no code with the grid
based algorithms, so they can be used to check them.
"""

from __future__ import annotations

import itertools
from collections import deque

import numpy as np

from ..errors import InputError


def _dist_matrix(coords):
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords.reshape(-1, 1)
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def expand_units(coords, weights=None):
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords.reshape(-1, 1)
    if weights is None:
        return coords
    return np.repeat(coords, np.asarray(weights, dtype=int), axis=0)


def pairwise_distances_sorted(coords, weights=None):
    units = expand_units(coords, weights)
    dm = _dist_matrix(units)
    iu = np.triu_indices(len(units), 1)
    return np.sort(dm[iu])


def kth_distance(coords, k, weights=None):
    values = pairwise_distances_sorted(coords, weights)
    if not 1 <= k <= len(values):
        raise InputError("rank out of range")
    return float(values[k - 1])


def mnn_values(coords, m=1, weights=None):
    """Sorted m-th nearest-neighbor distance of every unit (inf when undefined)."""
    units = expand_units(coords, weights)
    dm = _dist_matrix(units)
    np.fill_diagonal(dm, np.inf)
    dm.sort(axis=1)
    if m > dm.shape[1] - 1:
        return np.full(len(units), np.inf)
    return np.sort(dm[:, m - 1])


def kth_mnn(coords, k, m=1, weights=None):
    return float(mnn_values(coords, m, weights)[k - 1])


def nn_values(coords, weights=None):
    return mnn_values(coords, 1, weights)


def covering_radius(coords, centers):
    dm = _dist_matrix(coords)
    return float(dm[:, list(centers)].min(axis=1).max())


def kcenter(coords, k):
    """Optimal k-center radius by trying every set of k distinct input points."""
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords.reshape(-1, 1)
    distinct = np.unique(coords, axis=0)
    if k >= len(distinct):
        return 0.0
    dm = _dist_matrix(distinct)
    best = np.inf
    for subset in itertools.combinations(range(len(distinct)), k):
        best = min(best, dm[:, subset].min(axis=1).max())
    return float(best)


def mst_edges(coords, weights=None):
    """MST edge lengths over all units, longest first (Prim on the dense graph)."""
    units = expand_units(coords, weights)
    n = len(units)
    dm = _dist_matrix(units)
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    best[0] = 0.0
    edges = []
    for _ in range(n):
        cand = np.where(in_tree, np.inf, best)
        v = int(np.argmin(cand))
        if v != 0 or in_tree.any():
            edges.append(float(cand[v]))
        in_tree[v] = True
        best = np.minimum(best, dm[v])
    return sorted(edges, reverse=True)


def mst_kth_longest(coords, k, weights=None):
    return mst_edges(coords, weights)[k - 1]


def mst_kth_shortest(coords, k, weights=None):
    return sorted(mst_edges(coords, weights))[k - 1]


def threshold_components(coords, r):
    """Component label per row of the graph joining rows at distance <= r (BFS)."""
    dm = _dist_matrix(coords)
    n = len(dm)
    labels = np.full(n, -1, dtype=np.int64)
    nxt = 0
    for s in range(n):
        if labels[s] >= 0:
            continue
        labels[s] = nxt
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in np.flatnonzero((dm[u] <= r) & (labels < 0)):
                labels[v] = nxt
                queue.append(v)
        nxt += 1
    return labels


def refines(fine, coarse):
    """Whether every block of ``fine`` sits inside one block of ``coarse``."""
    seen = {}
    for f, c in zip(np.asarray(fine).tolist(), np.asarray(coarse).tolist()):
        if seen.setdefault(f, c) != c:
            return False
    return True


def _circumball(pts):
    base = pts[0]
    if len(pts) == 1:
        return base, 0.0
    a = pts[1:] - base
    gram = a @ a.T
    rhs = 0.5 * (a * a).sum(axis=1)
    try:
        lam = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        return None
    if np.linalg.cond(gram) > 1e12:
        return None
    center = base + lam @ a
    return center, float(np.linalg.norm(pts[0] - center))


def min_ball(coords, sketches, family):
    """Smallest radius of a ball whose enclosed points form a member set.

    The optimal ball is the circumball of at most d+1 of the points it holds,
    so every such circumball is tried.
    """
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords.reshape(-1, 1)
    n, d = coords.shape
    best = np.inf
    for size in range(1, min(n, d + 1) + 1):
        for support in itertools.combinations(range(n), size):
            ball = _circumball(coords[list(support)])
            if ball is None:
                continue
            center, radius = ball
            if radius >= best:
                continue
            dist = np.linalg.norm(coords - center, axis=1)
            inside = dist <= radius * (1 + 1e-9) + 1e-12
            if family.member(sketches[inside].sum(axis=0)):
                best = radius
    return float(best)


def _sweep(coords, sketches, family, want_all):
    dm = _dist_matrix(coords)
    radii = np.unique(np.concatenate([[0.0], dm[np.triu_indices(len(dm), 1)]]))
    for r in radii:
        labels = threshold_components(coords, r)
        count = labels.max() + 1
        sums = np.zeros((count, sketches.shape[1]))
        np.add.at(sums, labels, sketches)
        ok = family.member_rows(sums)
        if (ok.all() if want_all else ok.any()):
            return float(r)
    return np.inf


def min_component(coords, sketches, family):
    return _sweep(coords, sketches, family, want_all=False)


def connected_cluster(coords, sketches, family):
    return _sweep(coords, sketches, family, want_all=True)


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def minmax_cluster(coords, sketches, family, cap=10):
    """Optimal largest cluster radius (center inside its cluster) over all partitions."""
    coords = np.asarray(coords, dtype=float)
    if coords.ndim == 1:
        coords = coords.reshape(-1, 1)
    n = len(coords)
    if n > cap:
        raise InputError(f"exhaustive partition search is capped at {cap} points")
    dm = _dist_matrix(coords)
    best = np.inf
    for part in set_partitions(list(range(n))):
        worst = 0.0
        for block in part:
            if not family.member(sketches[block].sum(axis=0)):
                worst = np.inf
                break
            worst = max(worst, dm[np.ix_(block, block)].max(axis=0).min())
            if worst >= best:
                break
        best = min(best, worst)
    return float(best)


def smallest_nonzero(coords):
    dm = _dist_matrix(coords)
    vals = dm[np.triu_indices(len(dm), 1)]
    vals = vals[vals > 0]
    if not len(vals):
        raise InputError("no two distinct locations")
    return float(vals.min())


def bichromatic_values(coords, colors, weights=None):
    """Sorted distance from every red unit (color 0) to its nearest blue unit (color 1)."""
    units = expand_units(coords, weights)
    col = np.asarray(colors) if weights is None else np.repeat(np.asarray(colors), weights)
    dm = _dist_matrix(units)
    return np.sort(dm[np.ix_(col == 0, col == 1)].min(axis=1))
