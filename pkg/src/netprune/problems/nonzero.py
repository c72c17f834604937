"""Smallest nonzero distance in a multiset."""

from __future__ import annotations

import numpy as np

from ..errors import InputError
from ..framework import prepare
from ..geom import nearest_other_distance
from ..nets import del_far


def smallest_nonzero_distance(points, seed=0):
    """Exact smallest distance between two non-coincident points.

    Each round measures a random location's nearest other location and drops
    every location at least that far from all others. When nothing survives
    the last measured distance is the answer.
    """
    pts = prepare(points)
    if len(pts) < 2:
        raise InputError("need at least two distinct locations")
    rng = np.random.default_rng(seed)
    while True:
        idx = int(rng.integers(len(pts)))
        nu = nearest_other_distance(pts.coords, idx)
        split = del_far(pts, nu, ignore_weights=True)
        if not split.close.any():
            return nu
        pts = pts.subset(np.flatnonzero(split.close))
