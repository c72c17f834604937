"""Plain-text point files and synthetic data generators.

One point per line, whitespace-separated numbers. An optional first line
``# coord coord weight color flag attr`` names the column roles; without it
every column is a coordinate. Other lines starting with ``#`` are comments.
"""

from __future__ import annotations

import io
import sys
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .geom import PointSet
from .problems.sketches import PointAttributes

ROLES = ("coord", "weight", "color", "flag", "attr")


@dataclass
class PointFile:
    coords: np.ndarray
    weights: np.ndarray
    colors: np.ndarray | None = None
    flags: np.ndarray | None = None
    attrs: np.ndarray | None = None

    @property
    def dim(self):
        return self.coords.shape[1]

    def __len__(self):
        return len(self.coords)

    def pointset(self):
        return PointSet(self.coords, self.weights)

    def attributes(self):
        return PointAttributes(self.weights, self.colors, self.flags, self.attrs)


def _parse_header(line):
    roles = line.lstrip("#").split()
    if not roles or any(r not in ROLES for r in roles):
        return None
    if "coord" not in roles:
        raise InputError("header must declare at least one coord column")
    for single in ("weight", "color", "flag"):
        if roles.count(single) > 1:
            raise InputError(f"header declares more than one {single} column")
    return roles


def parse_points(text) -> PointFile:
    roles = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if roles is None and not rows:
                roles = _parse_header(line)
            continue
        try:
            rows.append([float(tok) for tok in line.split()])
        except ValueError:
            raise InputError(f"line {lineno}: non-numeric value") from None
    if not rows:
        raise InputError("no points in input")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise InputError("rows have different numbers of columns")
    table = np.asarray(rows, dtype=float)
    if not np.isfinite(table).all():
        raise InputError("values must be finite")
    if roles is None:
        roles = ["coord"] * width
    if len(roles) != width:
        raise InputError(f"header names {len(roles)} columns but rows have {width}")
    pick = lambda role: [i for i, r in enumerate(roles) if r == role]  # noqa: E731
    coords = table[:, pick("coord")]
    weights = np.ones(len(table), dtype=np.int64)
    if pick("weight"):
        w = table[:, pick("weight")[0]]
        if (w < 1).any() or (w != np.round(w)).any():
            raise InputError("weights must be positive integers")
        weights = w.astype(np.int64)
    colors = flags = attrs = None
    if pick("color"):
        c = table[:, pick("color")[0]]
        if (c < 0).any() or (c != np.round(c)).any():
            raise InputError("colors must be non-negative integers")
        colors = c.astype(np.int64)
    if pick("flag"):
        flags = (table[:, pick("flag")[0]] != 0).astype(np.int64)
    if pick("attr"):
        attrs = table[:, pick("attr")]
    return PointFile(coords, weights, colors, flags, attrs)


def read_points(path) -> PointFile:
    if path == "-":
        return parse_points(sys.stdin.read())
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_points(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def format_points(coords, extra=None, roles=None):
    coords = np.asarray(coords, dtype=float)
    out = io.StringIO()
    if roles is None:
        roles = ["coord"] * coords.shape[1]
    out.write("# " + " ".join(roles) + "\n")
    table = coords if extra is None else np.hstack([coords, extra])
    for row in table:
        out.write(" ".join("%.17g" % v for v in row) + "\n")
    return out.getvalue()


DISTRIBUTIONS = ("uniform-box", "gaussian-mixture", "tight-pairs", "lattice", "multiset-duplicates")


def generate(distribution, n, dim, seed):
    """Synthetic coordinates for the named distribution."""
    if n < 1 or dim < 1:
        raise InputError("n and d must be positive")
    rng = np.random.default_rng(seed)
    if distribution == "uniform-box":
        return rng.random((n, dim)) * 100.0
    if distribution == "gaussian-mixture":
        centers = rng.random((max(1, n // 200 + 1), dim)) * 100.0
        which = rng.integers(len(centers), size=n)
        return centers[which] + rng.normal(scale=2.0, size=(n, dim))
    if distribution == "tight-pairs":
        if n % 2:
            raise InputError("tight-pairs needs an even n")
        half = n // 2
        base = rng.random((half, dim)) * 1000.0
        direction = rng.normal(size=(half, dim))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        gap = rng.uniform(0.001, 0.01, size=(half, 1))
        return np.vstack([base, base + direction * gap])
    if distribution == "lattice":
        side = int(np.ceil(n ** (1.0 / dim) - 1e-9))
        axes = np.meshgrid(*([np.arange(side, dtype=float)] * dim), indexing="ij")
        grid = np.stack([a.reshape(-1) for a in axes], axis=1)
        return grid[:n]
    if distribution == "multiset-duplicates":
        if n < 2:
            raise InputError("multiset-duplicates needs n >= 2")
        distinct = max(1, n // 2)
        base = rng.random((distinct, dim)) * 100.0
        pick = rng.integers(distinct, size=n)
        pick[: min(2, n)] = 0
        return base[pick]
    raise InputError(f"unknown distribution {distribution!r}")
