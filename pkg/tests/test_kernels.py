import math

import numpy as np
import pytest

from netprune import _pykernels, kernels
from netprune.geom import cell_stencil, grid_keys, group_rows, line_stencil, side_for_diameter

try:
    from netprune import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None

needs_c = pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")


def test_backend_is_reported():
    assert kernels.BACKEND in ("cython", "python")


def _setup(seed, n=400, d=2):
    rng = np.random.default_rng(seed)
    coords = rng.random((n, d)) * 10
    if seed % 2:
        coords = np.round(coords, 1)
    r = float(rng.uniform(0.2, 2.0))
    side = r / (2 * math.sqrt(d))
    keys = grid_keys(coords, side)
    groups = group_rows(keys)
    return coords, r, side, keys, groups


@needs_c
@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("d", [1, 2, 3])
def test_net_scan_backends_agree(seed, d):
    coords, r, side, keys, groups = _setup(seed, d=d)
    offsets = cell_stencil(r / side, d)
    out = []
    for mod in (_pykernels, _ckernels):
        table = mod.CellTable(groups.cell_keys)
        out.append(mod.net_scan(coords, keys, table, groups.cell_start, groups.members, offsets, r))
    assert np.array_equal(out[0][0], out[1][0])
    assert np.array_equal(out[0][1], out[1][1])


@needs_c
@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("d", [1, 2, 3])
def test_nearest_in_cells_backends_agree(seed, d):
    coords, r, side, keys, groups = _setup(seed, d=d)
    offsets = cell_stencil(r / side, d)
    qself = np.arange(len(coords), dtype=np.int64)
    out = []
    for mod in (_pykernels, _ckernels):
        table = mod.CellTable(groups.cell_keys)
        out.append(mod.nearest_in_cells(coords, keys, qself, coords, table, groups.cell_start,
                                        groups.members, offsets, r, False))
    assert np.array_equal(out[0][0], out[1][0])
    assert np.array_equal(out[0][1], out[1][1])


@needs_c
@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("d", [1, 2, 3])
def test_offset_pairs_backends_agree(seed, d):
    coords, r, side, keys, groups = _setup(seed, n=150, d=d)
    offsets = cell_stencil(r / side, d)
    py = _pykernels.offset_pairs(coords, keys, side, offsets, r, None)
    cy = _ckernels.offset_pairs(coords, keys, side, offsets, r, None)
    assert np.array_equal(py[0], cy[0]) and np.array_equal(py[1], cy[1])


@needs_c
@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("d", [1, 2, 3])
def test_pair_weight_sum_backends_agree(seed, d):
    rng = np.random.default_rng(seed)
    coords = rng.random((300, d)) * 5
    rho = float(rng.uniform(0.2, 1.5))
    side = side_for_diameter(0.5 * rho / 8, d)
    groups = group_rows(grid_keys(coords, side))
    weights = rng.integers(1, 4, size=len(groups.cell_keys))
    prefixes, halves = line_stencil(rho / side, d)
    assert (_pykernels.pair_weight_sum(groups.cell_keys, weights, prefixes, halves)
            == _ckernels.pair_weight_sum(groups.cell_keys, weights, prefixes, halves))


@pytest.mark.parametrize("mod", [_pykernels] + ([_ckernels] if _ckernels else []))
def test_cell_table_lookup(mod):
    cells = np.array([[0, 0], [0, 5], [-3, 2], [7, -7]], dtype=np.int64)
    table = mod.CellTable(cells)
    query = np.array([[-3, 2], [1, 1], [7, -7], [0, 0]], dtype=np.int64)
    assert list(table.lookup(query)) == [2, -1, 3, 0]


@pytest.mark.parametrize("mod", [_pykernels] + ([_ckernels] if _ckernels else []))
def test_pair_weight_sum_counts_close_cell_pairs(mod):
    # 1-d cells at 0, 1 and 5 with reach 1: ordered pairs (0,0) (1,1) (0,1) (1,0) (5,5)
    cells = np.array([[0], [1], [5]], dtype=np.int64)
    weights = np.array([2, 1, 3], dtype=np.int64)
    prefixes, halves = line_stencil(1.0, 1)
    total = mod.pair_weight_sum(cells, weights, prefixes, halves)
    assert total == 2 * 2 + 1 * 1 + 2 * 1 * 2 + 3 * 3


@needs_c
@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("d", [1, 2, 3])
def test_ball_intervals_backends_agree(seed, d):
    coords, r, side, keys, _ = _setup(seed, n=150, d=d)
    side = side / 3
    keys = grid_keys(coords, side)
    prefixes, _ = line_stencil(r / side, d)
    out = [mod.ball_intervals(coords, keys, side, prefixes, r) for mod in (_pykernels, _ckernels)]
    for a, b in zip(*out):
        assert np.array_equal(a, b)


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("d", [1, 2, 3])
def test_ball_intervals_cover_exactly_the_offset_cells(seed, d):
    coords, r, side, keys, _ = _setup(seed, n=60, d=d)
    side = side / 2
    keys = grid_keys(coords, side)
    offsets = cell_stencil(r / side, d)
    pt, oi = kernels.offset_pairs(coords, keys, side, offsets, r)
    expected = set(zip(pt.tolist(), map(tuple, (keys[pt] + offsets[oi]).tolist())))
    prefixes, _ = line_stencil(r / side, d)
    got = set()
    for i, o, lo, hi in zip(*kernels.ball_intervals(coords, keys, side, prefixes, r)):
        prefix = tuple((keys[i, :-1] + prefixes[o]).tolist())
        got.update((int(i), prefix + (t,)) for t in range(int(lo), int(hi) + 1))
    assert got == expected
