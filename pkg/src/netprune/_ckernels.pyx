# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled grid kernels.

Mirrors ``_pykernels`` call for call. Cell lookups go through an
open-addressing hash over int64 key rows.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t
from libc.math cimport floor, sqrt, INFINITY
from libcpp.vector cimport vector

cnp.import_array()


cdef inline uint64_t _hash_row(const int64_t* key, Py_ssize_t d) noexcept nogil:
    cdef uint64_t h = 0x9E3779B97F4A7C15ULL
    cdef Py_ssize_t j
    for j in range(d):
        h ^= <uint64_t>key[j] + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)
        h ^= h >> 31
        h *= 0xBF58476D1CE4E5B9ULL
    h ^= h >> 29
    return h


cdef class CellTable:
    """Maps integer cell keys to row indices of ``keys``."""

    cdef readonly object keys
    cdef int64_t[:, ::1] kv
    cdef int64_t[::1] slots
    cdef uint64_t mask
    cdef Py_ssize_t dim
    cdef Py_ssize_t size

    def __init__(self, keys):
        arr = np.ascontiguousarray(keys, dtype=np.int64)
        if arr.ndim != 2:
            raise ValueError("keys must be a 2-d array")
        self.keys = arr
        self.kv = arr
        self.size = arr.shape[0]
        self.dim = arr.shape[1]
        cdef uint64_t cap = 4
        while cap < <uint64_t>(2 * self.size + 2):
            cap <<= 1
        self.mask = cap - 1
        self.slots = np.full(cap, -1, dtype=np.int64)
        cdef Py_ssize_t i
        cdef uint64_t s
        for i in range(self.size):
            s = _hash_row(&self.kv[i, 0] if self.dim else NULL, self.dim) & self.mask
            while self.slots[s] >= 0:
                s = (s + 1) & self.mask
            self.slots[s] = i

    def __len__(self):
        return self.size

    cdef Py_ssize_t _find(self, const int64_t* key) noexcept nogil:
        cdef uint64_t s = _hash_row(key, self.dim) & self.mask
        cdef int64_t row
        cdef Py_ssize_t j
        cdef bint same
        while True:
            row = self.slots[s]
            if row < 0:
                return -1
            same = True
            for j in range(self.dim):
                if self.kv[row, j] != key[j]:
                    same = False
                    break
            if same:
                return row
            s = (s + 1) & self.mask

    def find(self, key):
        cdef int64_t[::1] k = np.ascontiguousarray(key, dtype=np.int64)
        if self.dim == 0:
            return 0 if self.size else -1
        return self._find(&k[0])

    def lookup(self, queries):
        q = np.ascontiguousarray(queries, dtype=np.int64).reshape(-1, self.dim)
        cdef int64_t[:, ::1] qv = q
        cdef Py_ssize_t n = qv.shape[0], i
        out = np.empty(n, dtype=np.int64)
        cdef int64_t[::1] ov = out
        if self.dim == 0:
            out[:] = 0 if self.size else -1
            return out
        with nogil:
            for i in range(n):
                ov[i] = self._find(&qv[i, 0])
        return out


def net_scan(const double[:, ::1] coords, const int64_t[:, ::1] pkeys,
             CellTable table, const int64_t[::1] cell_start,
             const int64_t[::1] members, const int64_t[:, ::1] offsets, double r):
    cdef Py_ssize_t n = coords.shape[0], d = coords.shape[1]
    cdef Py_ssize_t noff = offsets.shape[0]
    assign_arr = np.full(n, -1, dtype=np.int64)
    cdef int64_t[::1] assign = assign_arr
    cdef vector[int64_t] centers
    cdef vector[int64_t] probe
    probe.resize(d)
    cdef double acc, diff
    cdef Py_ssize_t i, o, j, t, cell, q
    cdef int64_t c
    with nogil:
        for i in range(n):
            if assign[i] >= 0:
                continue
            c = <int64_t>centers.size()
            centers.push_back(i)
            assign[i] = c
            for o in range(noff):
                for j in range(d):
                    probe[j] = pkeys[i, j] + offsets[o, j]
                cell = table._find(probe.data())
                if cell < 0:
                    continue
                for t in range(cell_start[cell], cell_start[cell + 1]):
                    q = members[t]
                    if assign[q] >= 0:
                        continue
                    acc = 0.0
                    for j in range(d):
                        diff = coords[q, j] - coords[i, j]
                        acc += diff * diff
                    if sqrt(acc) < r:
                        assign[q] = c
    out = np.empty(centers.size(), dtype=np.int64)
    for i in range(<Py_ssize_t>centers.size()):
        out[i] = centers[i]
    return assign_arr, out


def nearest_in_cells(const double[:, ::1] qcoords, const int64_t[:, ::1] qkeys,
                     const int64_t[::1] qself, const double[:, ::1] coords,
                     CellTable table, const int64_t[::1] cell_start,
                     const int64_t[::1] members, const int64_t[:, ::1] offsets,
                     double radius, bint skip_zero):
    cdef Py_ssize_t k = qcoords.shape[0], d = qcoords.shape[1]
    cdef Py_ssize_t noff = offsets.shape[0]
    best_arr = np.full(k, np.inf)
    where_arr = np.full(k, -1, dtype=np.int64)
    cdef double[::1] best = best_arr
    cdef int64_t[::1] where = where_arr
    cdef vector[int64_t] probe
    probe.resize(d)
    cdef double acc, diff, low
    cdef Py_ssize_t i, o, j, t, cell, q
    cdef int64_t arg
    with nogil:
        for i in range(k):
            low = INFINITY
            arg = -1
            for o in range(noff):
                for j in range(d):
                    probe[j] = qkeys[i, j] + offsets[o, j]
                cell = table._find(probe.data())
                if cell < 0:
                    continue
                for t in range(cell_start[cell], cell_start[cell + 1]):
                    q = members[t]
                    if q == qself[i]:
                        continue
                    acc = 0.0
                    for j in range(d):
                        diff = coords[q, j] - qcoords[i, j]
                        acc += diff * diff
                    if skip_zero and acc <= 0.0:
                        continue
                    if acc < low:
                        low = acc
                        arg = q
            if arg >= 0 and sqrt(low) <= radius:
                best[i] = sqrt(low)
                where[i] = arg
    return best_arr, where_arr


def pair_weight_sum(cell_keys, weights, prefix_offsets, halves):
    keys = np.ascontiguousarray(cell_keys, dtype=np.int64)
    cdef Py_ssize_t m = keys.shape[0], d = keys.shape[1]
    if m == 0:
        return 0
    cdef int64_t[:, ::1] kv = keys
    cdef int64_t[::1] w = np.ascontiguousarray(weights, dtype=np.int64)
    cum_arr = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(w, out=cum_arr[1:])
    cdef int64_t[::1] cum = cum_arr
    cdef int64_t[:, ::1] poff = np.ascontiguousarray(prefix_offsets, dtype=np.int64).reshape(-1, max(d - 1, 0)) if d > 1 else np.zeros((len(halves), 1), dtype=np.int64)
    cdef int64_t[::1] hv = np.ascontiguousarray(halves, dtype=np.int64)
    cdef Py_ssize_t noff = hv.shape[0]

    if d > 1:
        pre = keys[:, :d - 1]
        change = np.any(pre[1:] != pre[:-1], axis=1)
        starts_arr = np.concatenate([[0], np.flatnonzero(change) + 1, [m]]).astype(np.int64)
        lines = CellTable(pre[starts_arr[:-1]])
    else:
        starts_arr = np.array([0, m], dtype=np.int64)
        lines = None
    cdef int64_t[::1] starts = starts_arr
    cdef Py_ssize_t nlines = starts.shape[0] - 1
    cdef CellTable lt = lines
    cdef vector[int64_t] probe
    probe.resize(max(d - 1, 1))
    cdef Py_ssize_t li, lj, o, j, a, b, a2, b2, lo, hi, s
    cdef int64_t h, x
    cdef int64_t total = 0, part
    with nogil:
        for li in range(nlines):
            a = starts[li]
            b = starts[li + 1]
            for o in range(noff):
                if d > 1:
                    for j in range(d - 1):
                        probe[j] = kv[a, j] + poff[o, j]
                    lj = lt._find(probe.data())
                    if lj < 0:
                        continue
                else:
                    lj = 0
                h = hv[o]
                a2 = starts[lj]
                b2 = starts[lj + 1]
                lo = a2
                hi = a2
                part = 0
                for s in range(a, b):
                    x = kv[s, d - 1]
                    while lo < b2 and kv[lo, d - 1] < x - h:
                        lo += 1
                    if hi < lo:
                        hi = lo
                    while hi < b2 and kv[hi, d - 1] <= x + h:
                        hi += 1
                    part += w[s] * (cum[hi] - cum[lo])
                total += part
    return int(total)


def offset_pairs(const double[:, ::1] coords, const int64_t[:, ::1] pkeys,
                 double side, const int64_t[:, ::1] offsets, double radius,
                 CellTable table=None):
    cdef Py_ssize_t n = coords.shape[0], d = coords.shape[1]
    cdef Py_ssize_t noff = offsets.shape[0]
    cdef double acc, lo, hi, c, g
    cdef vector[int64_t] pts, outs
    cdef vector[int64_t] probe
    probe.resize(d)
    cdef Py_ssize_t i, o, j
    cdef int64_t cell
    cdef bint use_table = table is not None
    with nogil:
        for i in range(n):
            for o in range(noff):
                acc = 0.0
                for j in range(d):
                    probe[j] = pkeys[i, j] + offsets[o, j]
                    lo = <double>probe[j] * side
                    hi = <double>(probe[j] + 1) * side
                    c = coords[i, j]
                    g = 0.0
                    if lo - c > 0.0:
                        g = lo - c
                    if c - hi > 0.0:
                        g = g + (c - hi)
                    acc += g * g
                if sqrt(acc) > radius:
                    continue
                if use_table:
                    cell = table._find(probe.data())
                    if cell < 0:
                        continue
                    pts.push_back(i)
                    outs.push_back(cell)
                else:
                    pts.push_back(i)
                    outs.push_back(o)
    cdef Py_ssize_t total = pts.size()
    pt_arr = np.empty(total, dtype=np.int64)
    out_arr = np.empty(total, dtype=np.int64)
    cdef int64_t[::1] pv = pt_arr, ov = out_arr
    for i in range(total):
        pv[i] = pts[i]
        ov[i] = outs[i]
    return pt_arr, out_arr


cdef inline double _axis_gap(double c, int64_t cell, double side) noexcept nogil:
    cdef double lo = <double>cell * side
    cdef double hi = <double>(cell + 1) * side
    cdef double g = 0.0
    if lo - c > 0.0:
        g = lo - c
    if c - hi > 0.0:
        g = g + (c - hi)
    return g


def ball_intervals(const double[:, ::1] coords, const int64_t[:, ::1] pkeys, double side,
                   const int64_t[:, ::1] prefixes, double radius):
    cdef Py_ssize_t n = coords.shape[0], d = coords.shape[1]
    cdef Py_ssize_t npre = prefixes.shape[0] if d > 1 else 1
    cdef Py_ssize_t last = d - 1
    cdef vector[int64_t] pts, pids, los, his
    cdef Py_ssize_t i, o, j
    cdef double acc, g, c, s
    cdef int64_t a, t_lo, t_hi
    with nogil:
        for i in range(n):
            c = coords[i, last]
            a = pkeys[i, last]
            # rounding can leave the point just outside its own key cell
            if _axis_gap(c, a - 1, side) < _axis_gap(c, a, side):
                a -= 1
            elif _axis_gap(c, a + 1, side) < _axis_gap(c, a, side):
                a += 1
            for o in range(npre):
                acc = 0.0
                for j in range(last):
                    g = _axis_gap(coords[i, j], pkeys[i, j] + prefixes[o, j], side)
                    acc += g * g
                if sqrt(acc + _axis_gap(c, a, side) ** 2) > radius:
                    continue
                s = radius * radius - acc
                s = sqrt(s) if s > 0.0 else 0.0
                t_hi = <int64_t>floor((c + s) / side) - 1
                if t_hi < a:
                    t_hi = a
                while t_hi > a and sqrt(acc + _axis_gap(c, t_hi, side) ** 2) > radius:
                    t_hi -= 1
                while sqrt(acc + _axis_gap(c, t_hi + 1, side) ** 2) <= radius:
                    t_hi += 1
                t_lo = <int64_t>floor((c - s) / side) + 1
                if t_lo > a:
                    t_lo = a
                while t_lo < a and sqrt(acc + _axis_gap(c, t_lo, side) ** 2) > radius:
                    t_lo += 1
                while sqrt(acc + _axis_gap(c, t_lo - 1, side) ** 2) <= radius:
                    t_lo -= 1
                pts.push_back(i)
                pids.push_back(o)
                los.push_back(t_lo)
                his.push_back(t_hi)
    cdef Py_ssize_t total = pts.size()
    out = np.empty((4, total), dtype=np.int64)
    cdef int64_t[:, ::1] ov = out
    for i in range(total):
        ov[0, i] = pts[i]
        ov[1, i] = pids[i]
        ov[2, i] = los[i]
        ov[3, i] = his[i]
    return out[0], out[1], out[2], out[3]
