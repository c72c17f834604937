"""Upward-closed point families with constant-size additive sketches.

A sketch is a fixed-length float vector. The sketch of a set is the sum of its
points' sketches, so merging disjoint sets is vector addition, and membership
is a predicate on the summed vector. Families are evaluated row-wise over a
whole block of sketches at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError


@dataclass
class PointAttributes:
    """Per-row side data read by sketch families."""

    weights: np.ndarray
    colors: np.ndarray | None = None
    flags: np.ndarray | None = None
    attrs: np.ndarray | None = None


class SketchFamily:
    name = "family"

    def sketch_rows(self, data: PointAttributes) -> np.ndarray:
        raise NotImplementedError

    def member_rows(self, sketches) -> np.ndarray:
        raise NotImplementedError

    def member(self, sketch) -> bool:
        return bool(self.member_rows(np.asarray(sketch, dtype=float).reshape(1, -1))[0])

    @staticmethod
    def combine(a, b):
        return np.asarray(a) + np.asarray(b)


class AtLeastPoints(SketchFamily):
    """Sets holding at least ``k`` points, counted with multiplicity."""

    name = "at-least-k"

    def __init__(self, k):
        if k < 1:
            raise InputError("k must be at least 1")
        self.k = k

    def sketch_rows(self, data):
        return data.weights.astype(float).reshape(-1, 1)

    def member_rows(self, sketches):
        return sketches[:, 0] >= self.k


class WeightAtLeast(SketchFamily):
    """Sets whose total attribute mass (first attribute column) reaches ``alpha``."""

    name = "weight-at-least"

    def __init__(self, alpha):
        self.alpha = float(alpha)

    def sketch_rows(self, data):
        if data.attrs is None:
            mass = data.weights.astype(float)
        else:
            mass = data.attrs[:, 0] * data.weights
        if (mass < 0).any():
            raise InputError("attribute mass must be non-negative")
        return mass.reshape(-1, 1)

    def member_rows(self, sketches):
        return sketches[:, 0] >= self.alpha


class ColorCoverage(SketchFamily):
    """Sets showing at least ``min_colors`` distinct colors out of ``num_colors``."""

    name = "colors"

    def __init__(self, num_colors, min_colors=None):
        self.num_colors = int(num_colors)
        self.min_colors = self.num_colors if min_colors is None else int(min_colors)
        if not 1 <= self.min_colors <= self.num_colors:
            raise InputError("min_colors must lie in [1, num_colors]")

    def sketch_rows(self, data):
        if data.colors is None:
            raise InputError("color coverage needs a color column")
        colors = data.colors.astype(np.int64)
        if colors.min() < 0 or colors.max() >= self.num_colors:
            raise InputError("colors must lie in [0, num_colors)")
        out = np.zeros((len(colors), self.num_colors))
        out[np.arange(len(colors)), colors] = data.weights
        return out

    def member_rows(self, sketches):
        return (sketches > 0).sum(axis=1) >= self.min_colors


class ContainsFlagged(SketchFamily):
    """Sets containing at least one flagged point."""

    name = "flagged"

    def sketch_rows(self, data):
        if data.flags is None:
            raise InputError("the flagged family needs a flag column")
        return (np.asarray(data.flags) != 0).astype(float).reshape(-1, 1)

    def member_rows(self, sketches):
        return sketches[:, 0] > 0


class LinearInequalities(SketchFamily):
    """Sets whose summed attribute vector ``v`` satisfies ``A @ v >= c``.

    With non-negative ``A`` and non-negative attributes the family is upward closed.
    """

    name = "linear"

    def __init__(self, matrix, bounds):
        self.matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        self.bounds = np.asarray(bounds, dtype=float).reshape(-1)
        if (self.matrix < 0).any():
            raise InputError("inequality coefficients must be non-negative")
        if self.matrix.shape[0] != len(self.bounds):
            raise InputError("one bound per inequality row is required")

    def sketch_rows(self, data):
        if data.attrs is None or data.attrs.shape[1] != self.matrix.shape[1]:
            raise InputError("attribute columns do not match the inequality system")
        if (data.attrs < 0).any():
            raise InputError("attributes must be non-negative")
        return data.attrs * data.weights.reshape(-1, 1)

    def member_rows(self, sketches):
        return np.all(sketches @ self.matrix.T >= self.bounds - 1e-12, axis=1)


def group_sketches(sketches, labels, count):
    """Summed sketch per group label."""
    out = np.zeros((count, sketches.shape[1]))
    for j in range(sketches.shape[1]):
        out[:, j] = np.bincount(labels, weights=sketches[:, j], minlength=count)
    return out


def family_from_name(name, k=None, alpha=None, num_colors=None, min_colors=None,
                     matrix=None, bounds=None):
    if name == "at-least-k":
        if k is None:
            raise InputError("family at-least-k needs --k")
        return AtLeastPoints(k)
    if name == "weight-at-least":
        if alpha is None:
            raise InputError("family weight-at-least needs --alpha")
        return WeightAtLeast(alpha)
    if name == "all-colors":
        return ColorCoverage(num_colors)
    if name == "min-colors":
        if min_colors is None:
            raise InputError("family min-colors needs --colors-min")
        return ColorCoverage(num_colors, min_colors)
    if name == "flagged":
        return ContainsFlagged()
    if name == "linear":
        if matrix is None:
            raise InputError("family linear needs an inequality system")
        return LinearInequalities(matrix, bounds)
    raise InputError(f"unknown family {name!r}")


FAMILY_NAMES = ("at-least-k", "weight-at-least", "all-colors", "min-colors", "flagged", "linear")
