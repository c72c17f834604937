import math

import numpy as np
import pytest

from netprune.errors import InfeasibleError, InputError
from netprune.framework import Above, Below, Bounded, NdpInstance, ndp_solve, prepare
from netprune.geom import PointSet
from netprune.nets import del_far
from netprune.problems import (AtLeastPoints, ColorCoverage, ContainsFlagged, KCenter,
                               KCenterContext, KthDistance, KthMNN, MstKthEdge, PointAttributes,
                               RankContext, closest_pair, connected_cluster,
                               connectivity_partition, exact_kth_nn, furthest_nn,
                               kcenter_2approx, kcenter_decider, kth_bichromatic,
                               kth_distance, kth_distance_decider, kth_mnn, kth_mnn_decider,
                               min_ball, min_component, minmax_cluster, mst_kth_edge,
                               mst_kth_edge_decider, smallest_nonzero_distance)
from netprune.problems import oracles

line = lambda *xs: np.array(xs, dtype=float).reshape(-1, 1)  # noqa: E731


def sound(answer, opt):
    if isinstance(answer, Below):
        return opt < answer.r * (1 + 1e-12)
    if isinstance(answer, Above):
        return opt > answer.r * (1 - 1e-12)
    return answer.lo * (1 - 1e-12) <= opt <= answer.hi * (1 + 1e-12)


# k-center

def test_kcenter_decider_examples():
    pts = PointSet([[0.0, 0.0], [10.0, 0.0]])
    assert kcenter_decider(pts, 3.0, 1, eps=1.0) == Above(3.0)
    assert kcenter_decider(pts, 12.0, 1) == Below(12.0)


def test_kcenter_zero_screen():
    res = kcenter_2approx([[0.0, 0.0], [10.0, 0.0]], 2)
    assert res.radius == 0 and res.trace.screened_zero
    interval, _ = ndp_solve(KCenter(), NdpInstance(prepare([[0.0], [10.0]]), KCenterContext(1)))
    assert 10.0 in interval


def test_kcenter_two_clusters():
    rng = np.random.default_rng(3)
    a = rng.random((6, 2)) * 0.07
    coords = np.vstack([a, a + 100])
    res = kcenter_2approx(coords, 2)
    assert res.radius <= 0.2
    assert len(res.centers) == 2


def test_kcenter_line():
    coords = line(*range(10))
    opt = oracles.kcenter(coords, 3)
    res = kcenter_2approx(coords, 3, seed=5)
    assert opt <= res.radius <= 2 * opt


def test_kcenter_rejects_bad_k():
    with pytest.raises(InputError):
        kcenter_2approx(line(0, 1), 0)
    with pytest.raises(InputError):
        kcenter_2approx(line(0, 1), 3)


# rank problems

def test_kth_distance_examples():
    assert sound(kth_distance_decider(PointSet(line(0, 1, 2)), 1.5, 2, 0.3), 1.0)
    interval, _ = ndp_solve(KthDistance(), NdpInstance(prepare(line(0, 1, 2)), RankContext(2)))
    assert 1.0 in interval
    res = kth_distance(line(0, 1, 2, 4, 7), 3, eps=0.1)
    pairs = oracles.pairwise_distances_sorted(line(0, 1, 2, 4, 7))
    assert pairs[2] <= res.value <= 1.1 * pairs[2]
    assert res.interval.spread <= 1.1 + 1e-12


def test_kth_distance_counts_coincident_pairs():
    assert kth_distance(line(0, 0, 0, 5), 3, eps=0.1).value == 0.0
    assert kth_distance(line(0, 0, 0, 5), 4, eps=0.1).value >= 5.0


def test_kth_mnn_example():
    assert sound(kth_mnn_decider(PointSet(line(0, 1, 3)), 1.5, 2, 1, 1.0), 1.0)
    res = kth_mnn(line(0, 1, 3), 2, m=1, eps=0.1)
    assert 1.0 <= res.value <= 1.1


def test_kth_mnn_prune_counterexample():
    # ranks where a far point's own m-NN value would be miscounted
    coords = line(0, 1, 3, 10)
    for k in range(1, 5):
        for m in (1, 2):
            opt = oracles.kth_mnn(coords, k, m)
            assert opt <= kth_mnn(coords, k, m, 0.1, seed=k).value <= 1.1 * opt * (1 + 1e-12)


def test_kth_mnn_infeasible_order():
    with pytest.raises(InfeasibleError):
        kth_mnn(line(0, 1, 2), 1, m=3)


def test_exact_nn_examples():
    assert furthest_nn(line(0, 1, 3, 7)).value == 4.0
    square = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
    assert closest_pair(square).value == 1.0
    assert exact_kth_nn(line(0, 1, 3, 7), 1).value == 1.0


@pytest.mark.parametrize("seed", range(5))
def test_exact_kth_nn_all_ranks(seed):
    rng = np.random.default_rng(seed)
    coords = rng.random((200, 2))
    nn = oracles.nn_values(coords)
    for k in range(1, 201):
        assert exact_kth_nn(coords, k, seed=k).value == nn[k - 1]


def test_bichromatic_rank():
    rng = np.random.default_rng(9)
    coords = rng.random((30, 2))
    colors = rng.integers(0, 2, size=30)
    colors[:2] = [0, 1]
    values = oracles.bichromatic_values(coords, colors)
    for k in (1, 5, len(values)):
        res = kth_bichromatic(coords, colors, k, eps=0.1, seed=k)
        assert values[k - 1] <= res.value <= 1.1 * values[k - 1] * (1 + 1e-12)


# connectivity and MST

def test_connectivity_examples():
    part = connectivity_partition(line(0, 0.4, 5), 1.0, 0.1)
    assert part.clusters() == [[0, 1], [2]]
    assert connectivity_partition(line(3), 1.0, 0.1).count == 1


def test_mst_examples():
    assert mst_kth_edge(line(0, 1, 2, 10), 1, eps=0.1).value == pytest.approx(8.0, rel=0.1)
    res = mst_kth_edge(line(0, 1, 2, 10), 1, eps=0.1)
    assert 8.0 <= res.value <= 8.8
    assert 3.0 <= mst_kth_edge(line(0, 3), 1, eps=0.1).value <= 3.3
    shortest = mst_kth_edge(line(0, 1, 3, 10), 1, eps=0.1, shortest=True).value
    assert 1.0 <= shortest <= 1.1


# sketch problems

def test_min_ball_examples():
    rng = np.random.default_rng(4)
    coords = np.vstack([rng.random((5, 2)) * 0.07, [[20.0, 0.0], [0.0, 30.0]]])
    fam = AtLeastPoints(5)
    opt = oracles.min_ball(coords, np.ones((7, 1)), fam)
    assert opt <= min_ball(coords, fam, eps=0.1).value <= 1.1 * opt * (1 + 1e-12)
    assert min_ball(coords, AtLeastPoints(1)).value == 0.0
    tri = [[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]]
    attrs = PointAttributes(np.ones(3, dtype=np.int64), colors=np.array([0, 1, 2]))
    value = min_ball(tri, ColorCoverage(3), attrs, eps=0.1).value
    circumradius = 1 / math.sqrt(3)
    assert circumradius * (1 - 1e-9) <= value <= 1.1 * circumradius * (1 + 1e-9)


def test_min_component_example():
    coords = line(0, 1, 100, 102, 104)
    v = min_component(coords, AtLeastPoints(3), eps=0.1).value
    assert 2.0 <= v <= 2.2
    assert min_component(coords, AtLeastPoints(1)).value == 0.0


def test_connected_cluster_stations():
    coords = line(0, 1, 2, 50, 53)
    attrs = PointAttributes(np.ones(5, dtype=np.int64), flags=np.array([1, 0, 0, 0, 1]))
    v = connected_cluster(coords, ContainsFlagged(), attrs, eps=0.1).value
    assert 3.0 <= v <= 3.3
    all_flagged = PointAttributes(np.ones(5, dtype=np.int64), flags=np.ones(5))
    assert connected_cluster(coords, ContainsFlagged(), all_flagged).value == 0.0


def test_minmax_cluster_pairs():
    coords = line(0, 1, 50, 52, 100, 103)
    fam = AtLeastPoints(2)
    opt = oracles.minmax_cluster(coords, np.ones((6, 1)), fam)
    v = minmax_cluster(coords, fam, eps=0.1).value
    assert opt <= v <= 4.1 * opt
    assert minmax_cluster(coords, AtLeastPoints(1)).value == 0.0


def test_sketch_problems_reject_impossible_family():
    with pytest.raises(InfeasibleError):
        min_ball(line(0, 1), AtLeastPoints(5))
    with pytest.raises(InfeasibleError):
        connected_cluster(line(0, 1), AtLeastPoints(5))


# non-zero distance

def test_nonzero_examples():
    assert smallest_nonzero_distance(line(0, 0, 1, 5)) == 1.0
    assert smallest_nonzero_distance(line(2, 7.5)) == 5.5
    with pytest.raises(InputError):
        smallest_nonzero_distance(line(1, 1, 1))


# invariants

@pytest.mark.parametrize("problem_index", range(4))
def test_deciders_are_three_way_sound(problem_index):
    rng = np.random.default_rng(100 + problem_index)
    bad = []
    for trial in range(250):
        coords = np.round(rng.random((int(rng.integers(3, 31)), int(rng.integers(1, 3)))) * 6, 1)
        pts = prepare(coords)
        problem, ctx, oracle = list(_rank_cases_for(rng, pts))[problem_index]
        opt = oracle(pts, ctx)
        for _ in range(4):
            r = float(np.exp(rng.uniform(-4, 3)))
            eps = float(rng.choice([1.0, 0.5, 0.1]))
            answer = problem.decide(pts, r, ctx, eps)
            if not sound(answer, opt):
                bad.append((trial, r, eps, answer, opt))
    assert not bad, bad[:3]


def _rank_cases_for(rng, pts):
    units = pts.total_weight
    k = int(rng.integers(1, units * (units - 1) // 2 + 1))
    yield KthDistance(), RankContext(k), lambda p, c: oracles.kth_distance(p.coords, c.k, p.weights)
    m = int(rng.integers(1, min(3, units - 1) + 1))
    k = int(rng.integers(1, units + 1))
    yield KthMNN(), RankContext(k, m), lambda p, c: oracles.kth_mnn(p.coords, c.k, c.m, p.weights)
    k = int(rng.integers(1, units))
    yield MstKthEdge(), RankContext(k), lambda p, c: oracles.mst_kth_longest(p.coords, c.k, p.weights)
    k = int(rng.integers(1, min(len(pts), 4) + 1))
    yield KCenter(), KCenterContext(k), lambda p, c: oracles.kcenter(p.coords, c.k)


@pytest.mark.parametrize("problem_index", range(4))
def test_prune_preserves_optimum(problem_index):
    rng = np.random.default_rng(200 + problem_index)
    checked = 0
    for _ in range(300):
        coords = np.round(rng.random((int(rng.integers(3, 25)), int(rng.integers(1, 3)))) * 6, 1)
        pts = prepare(coords)
        problem, ctx, oracle = list(_rank_cases_for(rng, pts))[problem_index]
        opt = oracle(pts, ctx)
        if problem.is_zero(pts, ctx):
            continue
        r = opt * float(rng.uniform(1.0001, 3.0)) + 1e-9
        split = del_far(pts, r)
        if not split.close.any():
            continue
        new_ctx = problem.prune_context(pts, split.close, ctx)
        kept = pts.subset(np.flatnonzero(split.close))
        assert oracle(kept, new_ctx) == opt
        checked += 1
    assert checked > 50


def test_lipschitz_under_jitter():
    rng = np.random.default_rng(77)
    for _ in range(100):
        coords = rng.random((15, 2)) * 5
        delta = float(rng.uniform(0.001, 0.2))
        jitter = rng.normal(size=coords.shape)
        jitter *= delta * rng.random((15, 1)) / np.linalg.norm(jitter, axis=1, keepdims=True)
        moved = coords + jitter
        k = int(rng.integers(1, 15))
        assert abs(oracles.kth_distance(coords, k) - oracles.kth_distance(moved, k)) <= 2 * delta + 1e-12
        assert abs(oracles.kth_mnn(coords, k) - oracles.kth_mnn(moved, k)) <= 2 * delta + 1e-12
        assert abs(oracles.mst_kth_longest(coords, k) - oracles.mst_kth_longest(moved, k)) <= 2 * delta + 1e-12


@pytest.mark.parametrize("seed", range(20))
def test_covered_sums_match_per_cell_sums(seed):
    from netprune import kernels
    from netprune.geom import ball_runs, cell_stencil, grid_keys, group_rows
    from netprune.problems.clusters import covered_sums
    from netprune.problems.sketches import group_sketches
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4))
    coords = rng.random((int(rng.integers(2, 30)), d)) * 4
    payload = rng.integers(0, 3, size=(len(coords), 2)).astype(float)
    side, radius = float(rng.uniform(0.1, 0.6)), float(rng.uniform(0.2, 1.5))
    keys = grid_keys(coords, side)
    offsets = cell_stencil(radius / side, d)
    pt, oi = kernels.offset_pairs(coords, keys, side, offsets, radius)
    cells = group_rows(keys[pt] + offsets[oi])
    per_cell = {tuple(row) for row in group_sketches(payload[pt], cells.cell_of, len(cells)).tolist()}
    swept = {tuple(row) for row in covered_sums(ball_runs(coords, side, radius), payload).tolist()}
    # the sweep reads each line where coverage changes: every row is some cell's
    # total (an unmarked cell totals zero) and every marked cell's total appears
    assert per_cell <= swept <= per_cell | {(0.0, 0.0)}
