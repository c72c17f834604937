import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from netprune.errors import EmptyGridError, InputError
from netprune.geom import (Grid, PointSet, WeightedPoint, ball_runs, build_grid, cell_stencil, grid_id, merged_runs,
                           grid_keys, group_rows, line_stencil, merge_duplicates,
                           nearest_other_distance, point_box_distance, side_for_diameter)

coord = st.floats(-50, 50, allow_nan=False, allow_infinity=False, width=64)


def clouds(max_n=40, max_d=3):
    return st.integers(1, max_d).flatmap(
        lambda d: arrays(np.float64, st.tuples(st.integers(1, max_n), st.just(d)), elements=coord))


def test_grid_id_examples():
    assert grid_id((0.5, -0.5), 1.0) == (0, -1)
    assert grid_id((2.0, 3.999), 2.0) == (1, 1)
    with pytest.raises(InputError):
        grid_id((1.0,), 0.0)
    with pytest.raises(InputError):
        grid_id((1e300,), 1e-300)


def test_pointset_validation():
    with pytest.raises(InputError):
        PointSet([[0.0], [1.0]], weights=[1, 0])
    with pytest.raises(InputError):
        PointSet([[0.0, math.nan]])
    with pytest.raises(InputError):
        PointSet([[0.0]], weights=[1, 1])
    with pytest.raises(InputError):
        WeightedPoint((0.0,), 0)
    pts = PointSet.from_points([WeightedPoint((0.0, 1.0), 2), WeightedPoint((3.0, 4.0))])
    assert pts.total_weight == 3 and pts.dim == 2
    assert pts.to_points()[0] == WeightedPoint((0.0, 1.0), 2)


def test_merge_duplicates_keeps_first_appearance_order():
    pts = PointSet([[2.0], [0.0], [2.0], [-0.0], [5.0]], [1, 2, 3, 1, 1], payload=[[1], [2], [3], [4], [5]])
    merged = merge_duplicates(pts)
    assert merged.coords.ravel().tolist() == [2.0, 0.0, 5.0]
    assert merged.weights.tolist() == [4, 3, 1]
    assert merged.payload.ravel().tolist() == [4.0, 6.0, 5.0]


@given(clouds())
def test_merge_duplicates_properties(coords):
    rng = np.random.default_rng(len(coords))
    coords = np.vstack([coords, coords[rng.integers(len(coords), size=len(coords) // 2)]])
    weights = rng.integers(1, 5, size=len(coords))
    merged = merge_duplicates(PointSet(coords, weights))
    assert merged.total_weight == int(weights.sum())
    assert len(np.unique(merged.coords + 0.0, axis=0)) == len(merged)
    for row, w in zip(merged.coords, merged.weights):
        assert w == weights[(coords == row).all(axis=1)].sum()


@given(clouds(), st.floats(0.01, 20))
def test_grid_keys_match_grid_id(coords, side):
    keys = grid_keys(coords, side)
    for row, key in zip(coords, keys):
        assert tuple(key.tolist()) == grid_id(tuple(row.tolist()), side)


@given(clouds())
def test_group_rows_partitions_rows(coords):
    keys = grid_keys(coords, 1.5)
    groups = group_rows(keys)
    assert sorted(groups.members.tolist()) == list(range(len(coords)))
    ordered = [tuple(k) for k in groups.cell_keys.tolist()]
    assert ordered == sorted(set(ordered))
    for c in range(len(groups)):
        rows = groups.members[groups.cell_start[c]:groups.cell_start[c + 1]]
        assert (keys[rows] == groups.cell_keys[c]).all()
        assert (groups.cell_of[rows] == c).all()


@given(st.floats(0.0, 6.0), st.integers(1, 3))
def test_cell_stencil_is_exact(reach, dim):
    stencil = {tuple(o) for o in cell_stencil(reach, dim).tolist()}
    bound = int(math.floor(reach)) + 2
    axis = range(-bound, bound + 1)
    for off in np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), -1).reshape(-1, dim).tolist():
        gap = sum(max(0, abs(o) - 1) ** 2 for o in off)
        assert (tuple(off) in stencil) == (gap <= reach * reach * (1 + 1e-9) + 1e-12)


@given(st.floats(0.0, 6.0), st.integers(1, 3))
def test_line_stencil_matches_cell_stencil(reach, dim):
    full = {tuple(o) for o in cell_stencil(reach, dim).tolist()}
    prefixes, halves = line_stencil(reach, dim)
    rebuilt = set()
    for prefix, half in zip(prefixes.tolist(), halves.tolist()):
        for t in range(-half, half + 1):
            rebuilt.add(tuple(prefix) + (t,))
    assert rebuilt == full


def test_point_box_distance():
    assert point_box_distance((0.5, 0.5), (0, 0), 1.0) == 0.0
    assert point_box_distance((3.0, 0.5), (0, 0), 1.0) == pytest.approx(2.0)
    assert point_box_distance((3.0, 4.0), (0, 0), 1.0) == pytest.approx(math.hypot(2, 3))


def test_grid_cells_and_weights():
    grid = build_grid(PointSet([[0.1, 0.1], [0.2, 0.3], [1.5, 0.2]], [1, 2, 5]), 1.0)
    assert len(grid) == 2
    assert grid.cells == {(0, 0): [0, 1], (1, 0): [2]}
    assert grid.cell_weight((0, 0)) == 3
    assert grid.cell_weight((4, 4)) == 0
    with pytest.raises(EmptyGridError):
        Grid(PointSet(np.empty((0, 2))), 1.0)


@given(clouds(max_n=30), st.floats(0.1, 10), st.floats(0.2, 5))
def test_neighborhood_cells_cover_the_ball(coords, r, side):
    grid = Grid(PointSet(coords), side)
    center = coords[0]
    found = set(grid.neighborhood_cells(center, r))
    for row, key in zip(coords, grid.point_keys):
        if np.linalg.norm(row - center) <= r:
            assert tuple(key.tolist()) in found
    for key in found:
        assert point_box_distance(center, key, side) <= r * (1 + 1e-9)


def test_side_for_diameter():
    assert side_for_diameter(2.0, 4) == pytest.approx(1.0)


@given(clouds(max_n=30))
def test_nearest_other_distance_matches_brute(coords):
    if len(coords) < 2:
        return
    dm = np.sqrt(((coords[:, None] - coords[None]) ** 2).sum(-1))
    np.fill_diagonal(dm, np.inf)
    assert nearest_other_distance(coords, 0) == pytest.approx(dm[0].min(), rel=1e-12, abs=0)


@settings(max_examples=40)
@given(st.integers(0, 10_000))
def test_merged_runs_join_exactly_the_cell_sharing_runs(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4))
    coords = rng.random((int(rng.integers(1, 25)), d)) * 5
    side, radius = float(rng.uniform(0.1, 1)), float(rng.uniform(0.1, 2))
    runs = ball_runs(coords, side, radius)
    seg = merged_runs(runs)
    # brute force: runs share a segment iff linked by a chain of overlapping runs on one line
    parent = list(range(len(seg)))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for i in range(len(seg)):
        for j in range(i):
            if runs.line[i] == runs.line[j] and runs.lo[i] <= runs.hi[j] and runs.lo[j] <= runs.hi[i]:
                parent[find(i)] = find(j)
    roots = [find(i) for i in range(len(seg))]
    for i in range(len(seg)):
        for j in range(i):
            assert (seg[i] == seg[j]) == (roots[i] == roots[j])


def test_stencil_bound_follows_tolerant_reach():
    # a reach just below 6 admits gap-6 cells through the tolerance, so the
    # +-7 offsets must be enumerated too, and the cached result must stay whole
    below = 6.0 - 1e-10
    for reach in (below, 6.0):
        offsets = sorted(o[0] for o in cell_stencil(reach, 1).tolist())
        assert offsets == list(range(-7, 8))
        assert line_stencil(reach, 1)[1].tolist() == [7]
