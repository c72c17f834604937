"""Pure numpy versions of the grid kernels.

Same signatures and same results as the compiled ``_ckernels`` module.
Selected automatically when the extension is not built.
"""

import numpy as np


def sq_norms(diff):
    """Row-wise squared norms, summed column by column like the compiled loops."""
    acc = np.zeros(diff.shape[0])
    for j in range(diff.shape[1]):
        acc = acc + diff[:, j] * diff[:, j]
    return acc


class CellTable:
    """Maps integer cell keys to row indices of ``keys``."""

    def __init__(self, keys):
        self.keys = np.ascontiguousarray(keys, dtype=np.int64)
        self._index = {row: i for i, row in enumerate(map(tuple, self.keys.tolist()))}

    def __len__(self):
        return len(self._index)

    def find(self, key):
        return self._index.get(tuple(int(k) for k in key), -1)

    def lookup(self, queries):
        q = np.asarray(queries, dtype=np.int64).reshape(-1, self.keys.shape[1])
        get = self._index.get
        return np.fromiter((get(t, -1) for t in map(tuple, q.tolist())),
                           dtype=np.int64, count=len(q))


def _gather(table, base, offsets, cell_start, members):
    get = table._index.get
    chunks = []
    for off in offsets:
        cell = get(tuple(b + o for b, o in zip(base, off)), -1)
        if cell >= 0:
            chunks.append(members[cell_start[cell]:cell_start[cell + 1]])
    if not chunks:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(chunks)


def net_scan(coords, pkeys, table, cell_start, members, offsets, r):
    n = len(coords)
    assign = np.full(n, -1, dtype=np.int64)
    centers = []
    keys = pkeys.tolist()
    offs = offsets.tolist()
    for i in range(n):
        if assign[i] >= 0:
            continue
        c = len(centers)
        centers.append(i)
        assign[i] = c
        cand = _gather(table, keys[i], offs, cell_start, members)
        cand = cand[assign[cand] < 0]
        if len(cand):
            d2 = sq_norms(coords[cand] - coords[i])
            assign[cand[np.sqrt(d2) < r]] = c
    return assign, np.asarray(centers, dtype=np.int64)


def nearest_in_cells(qcoords, qkeys, qself, coords, table, cell_start, members,
                     offsets, radius, skip_zero):
    k = len(qcoords)
    best = np.full(k, np.inf)
    where = np.full(k, -1, dtype=np.int64)
    keys = qkeys.tolist()
    offs = offsets.tolist()
    for i in range(k):
        cand = _gather(table, keys[i], offs, cell_start, members)
        cand = cand[cand != qself[i]]
        if not len(cand):
            continue
        d2 = sq_norms(coords[cand] - qcoords[i])
        if skip_zero:
            keep = d2 > 0.0
            cand, d2 = cand[keep], d2[keep]
            if not len(cand):
                continue
        j = int(np.argmin(d2))
        if np.sqrt(d2[j]) <= radius:
            best[i] = np.sqrt(d2[j])
            where[i] = cand[j]
    return best, where


def pair_weight_sum(cell_keys, weights, prefix_offsets, halves):
    m, d = cell_keys.shape
    if m == 0:
        return 0
    x = cell_keys[:, d - 1]
    w = np.asarray(weights, dtype=np.int64)
    cum = np.concatenate([[0], np.cumsum(w)])
    if d == 1:
        starts = np.array([0, m])
        prefixes = [()]
    else:
        pre = cell_keys[:, :d - 1]
        change = np.any(pre[1:] != pre[:-1], axis=1)
        starts = np.concatenate([[0], np.flatnonzero(change) + 1, [m]])
        prefixes = [tuple(row) for row in pre[starts[:-1]].tolist()]
    lines = {p: i for i, p in enumerate(prefixes)}
    offs = [tuple(o) for o in np.asarray(prefix_offsets).tolist()]
    total = 0
    for li, p in enumerate(prefixes):
        a, b = starts[li], starts[li + 1]
        xs, ws = x[a:b], w[a:b]
        for off, h in zip(offs, halves):
            lj = lines.get(tuple(u + v for u, v in zip(p, off)), -1)
            if lj < 0:
                continue
            a2, b2 = starts[lj], starts[lj + 1]
            xs2 = x[a2:b2]
            lo = np.searchsorted(xs2, xs - h, side="left")
            hi = np.searchsorted(xs2, xs + h, side="right")
            total += int(np.dot(ws, cum[a2 + hi] - cum[a2 + lo]))
    return total


def offset_pairs(coords, pkeys, side, offsets, radius, table=None):
    n, d = coords.shape
    pts, outs, oids = [], [], []
    for oi, off in enumerate(offsets):
        cells = pkeys + off
        lo = cells * side
        hi = (cells + 1) * side
        gap = np.maximum(lo - coords, 0.0) + np.maximum(coords - hi, 0.0)
        ok = np.flatnonzero(np.sqrt(sq_norms(gap)) <= radius)
        if table is not None and len(ok):
            found = table.lookup(cells[ok])
            keep = found >= 0
            ok, found = ok[keep], found[keep]
        if not len(ok):
            continue
        pts.append(ok)
        oids.append(np.full(len(ok), oi, dtype=np.int64))
        outs.append(oids[-1] if table is None else found)
    if not pts:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy()
    pt = np.concatenate(pts).astype(np.int64)
    # emission order of the compiled kernel: by point, then by offset
    order = np.lexsort((np.concatenate(oids), pt))
    return pt[order], np.concatenate(outs).astype(np.int64)[order]


def _axis_gap(c, cells, side):
    lo = cells * side
    hi = (cells + 1) * side
    return np.maximum(lo - c, 0.0) + np.maximum(c - hi, 0.0)


def ball_intervals(coords, pkeys, side, prefixes, radius):
    """Per point and line prefix, the run of last-axis cells within ``radius``.

    A line is the set of cells sharing all but the last key. Cells within
    ``radius`` of a point form one contiguous run on each line.
    """
    n, d = coords.shape
    last = d - 1
    npre = len(prefixes) if d > 1 else 1
    c = coords[:, last]
    a = pkeys[:, last].copy()
    # rounding can leave the point just outside its own key cell
    here = _axis_gap(c, a, side)
    left = _axis_gap(c, a - 1, side) < here
    right = ~left & (_axis_gap(c, a + 1, side) < here)
    a = a - left + right
    pts, pids, los, his = [], [], [], []
    for o in range(npre):
        acc = np.zeros(n)
        for j in range(last):
            g = _axis_gap(coords[:, j], pkeys[:, j] + prefixes[o, j], side)
            acc = acc + g * g
        ok = np.flatnonzero(np.sqrt(acc + _axis_gap(c, a, side) ** 2) <= radius)
        if not len(ok):
            continue
        acc_ok, c_ok, a_ok = acc[ok], c[ok], a[ok]

        def inside(t):
            return np.sqrt(acc_ok + _axis_gap(c_ok, t, side) ** 2) <= radius

        s = np.sqrt(np.maximum(radius * radius - acc_ok, 0.0))
        t_hi = np.maximum(np.floor((c_ok + s) / side).astype(np.int64) - 1, a_ok)
        t_lo = np.minimum(np.floor((c_ok - s) / side).astype(np.int64) + 1, a_ok)
        for t, step, toward in ((t_hi, 1, a_ok), (t_lo, -1, a_ok)):
            while True:
                move = (t != toward) & ~inside(t)
                if not move.any():
                    break
                t -= step * move
            while True:
                move = inside(t + step)
                if not move.any():
                    break
                t += step * move
        pts.append(ok)
        pids.append(np.full(len(ok), o, dtype=np.int64))
        los.append(t_lo)
        his.append(t_hi)
    if not pts:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy(), empty.copy(), empty.copy()
    pt = np.concatenate(pts).astype(np.int64)
    pid = np.concatenate(pids)
    # emission order of the compiled kernel: by point, then by prefix
    order = np.lexsort((pid, pt))
    return pt[order], pid[order], np.concatenate(los)[order], np.concatenate(his)[order]
