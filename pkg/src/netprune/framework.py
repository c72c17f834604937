"""The net-and-prune driver and interval refinement.

A problem plugs in a three-way decider. The driver repeatedly samples a point,
takes its nearest-neighbor distance as a probe radius and, depending on the
two decider answers, either stops, discards isolated points or coarsens the
input with a net. The output is an interval of bounded spread that contains
the optimum; :func:`refine_phi` and :func:`refine_eps` tighten it afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Protocol

import numpy as np

from .errors import ContractError, InputError
from .geom import PointSet, merge_duplicates, nearest_other_distance
from .nets import compute_net, del_far

NET_FACTOR = 37
CONST_C = 28


@dataclass(frozen=True)
class Below:
    """The optimum is strictly smaller than ``r``."""
    r: float


@dataclass(frozen=True)
class Above:
    """The optimum is strictly larger than ``r``."""
    r: float


@dataclass(frozen=True)
class Bounded:
    """The optimum lies in ``[lo, hi]``."""
    lo: float
    hi: float


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (0 <= self.lo <= self.hi):
            raise ContractError(f"malformed interval [{self.lo}, {self.hi}]")

    @property
    def spread(self):
        if self.lo == 0:
            return 1.0 if self.hi == 0 else math.inf
        return self.hi / self.lo

    def __contains__(self, value):
        return self.lo <= value <= self.hi


@dataclass
class NdpInstance:
    points: PointSet
    context: Any = None


class NdpProblem(Protocol):
    name: str

    def phi(self, eps: float) -> float: ...

    def decide(self, points: PointSet, r: float, context: Any, eps: float): ...

    def prune_context(self, points: PointSet, close: np.ndarray, context: Any) -> Any: ...

    def is_zero(self, points: PointSet, context: Any) -> bool: ...


@dataclass
class TraceStep:
    radius: float
    low_answer: Any
    high_answer: Any
    action: str
    size_before: int
    size_after: int
    context: Any = None

    def as_dict(self):
        return {
            "radius": self.radius,
            "low": _outcome_dict(self.low_answer),
            "high": _outcome_dict(self.high_answer),
            "action": self.action,
            "size_before": self.size_before,
            "size_after": self.size_after,
        }


@dataclass
class RunTrace:
    steps: list = field(default_factory=list)
    screened_zero: bool = False

    def __len__(self):
        return len(self.steps)

    def actions(self):
        counts = {"net": 0, "prune": 0, "return": 0}
        for s in self.steps:
            counts[s.action] += 1
        return counts

    def net_radii(self):
        return [s.radius for s in self.steps if s.action == "net"]


def _outcome_dict(o):
    if isinstance(o, Below):
        return {"kind": "below", "r": o.r}
    if isinstance(o, Above):
        return {"kind": "above", "r": o.r}
    if isinstance(o, Bounded):
        return {"kind": "bounded", "lo": o.lo, "hi": o.hi}
    return None


def check_outcome(outcome, phi):
    """Reject answers that break the decider contract."""
    if isinstance(outcome, Bounded):
        lo, hi = outcome.lo, outcome.hi
        if not (0 < lo <= hi) or hi > lo * phi * (1 + 1e-9):
            raise ContractError(f"bounded answer [{lo}, {hi}] violates spread {phi}")
        return outcome
    if isinstance(outcome, (Below, Above)):
        return outcome
    raise ContractError(f"decider returned {outcome!r}")


def prepare(points) -> PointSet:
    """Validate and merge coincident rows before a run."""
    if not isinstance(points, PointSet):
        points = PointSet.from_points(points)
    if len(points) == 0:
        raise InputError("empty point set")
    return merge_duplicates(points)


def default_radius_sampler(points, rng):
    idx = int(rng.integers(len(points)))
    return nearest_other_distance(points.coords, idx)


def ndp_solve(problem, instance, seed=0, radius_sampler=None, max_iterations=None, eps=1.0):
    """Run the driver and return ``(Interval, RunTrace)``.

    ``radius_sampler(points, rng)`` supplies the probe radius each round; the
    default picks a uniformly random location and measures its nearest other
    location by a linear scan.
    """
    rng = np.random.default_rng(seed)
    points = instance.points
    context = instance.context
    trace = RunTrace()
    if problem.is_zero(points, context):
        trace.screened_zero = True
        return Interval(0.0, 0.0), trace
    sampler = radius_sampler or default_radius_sampler
    phi = problem.phi(eps)
    cap = max_iterations or 10 * len(points) + 100
    for _ in range(cap):
        n = len(points)
        if n < 2:
            raise ContractError("driver ran out of points before bracketing the optimum")
        nu = sampler(points, rng)
        if not nu > 0:
            raise ContractError("probe radius must be positive")
        low = check_outcome(problem.decide(points, nu, context, eps), phi)
        high = check_outcome(problem.decide(points, NET_FACTOR * nu, context, eps), phi)
        step = TraceStep(nu, low, high, "return", n, n, context)
        trace.steps.append(step)
        if isinstance(low, Bounded):
            return Interval(low.lo / 2, 2 * low.hi), trace
        if isinstance(high, Bounded):
            return Interval(high.lo / 2, 2 * high.hi), trace
        if isinstance(low, Above) and isinstance(high, Below):
            return Interval(nu / 2, 2 * NET_FACTOR * nu), trace
        if isinstance(low, Below) and isinstance(high, Below):
            split = del_far(points, nu)
            if not split.close.any():
                raise ContractError("prune step left no points")
            context = problem.prune_context(points, split.close, context)
            points = points.subset(np.flatnonzero(split.close))
            step.action = "prune"
        elif isinstance(low, Above) and isinstance(high, Above):
            points = compute_net(points, 3 * nu).net
            step.action = "net"
        else:
            raise ContractError(f"inconsistent answers {low!r} and {high!r} at radius {nu}")
        step.size_after = len(points)
        step.context = context
    raise ContractError(f"driver did not converge within {cap} iterations")


def _answer(problem, instance, r, eps, phi):
    return check_outcome(problem.decide(instance.points, r, instance.context, eps), phi)


def refine_phi(problem, instance, interval, eps=1.0):
    """Shrink a driver interval to spread ``phi`` by a search over geometric probes."""
    phi = problem.phi(eps)
    lo, hi = interval.lo, interval.hi
    if lo == 0 or hi <= phi * lo:
        return interval
    steps = int(math.floor(math.log(hi / lo) / math.log(phi)))
    probes = [lo * phi ** i for i in range(steps + 1)]
    if probes[-1] < hi:
        probes.append(hi)
    # f >= probes[left] and f <= probes[right] throughout
    left, right = 0, len(probes) - 1
    while right - left > 1:
        mid = (left + right) // 2
        ans = _answer(problem, instance, probes[mid], eps, phi)
        if isinstance(ans, Bounded):
            return Interval(ans.lo, ans.hi)
        if isinstance(ans, Below):
            right = mid
        else:
            left = mid
    return Interval(probes[left], probes[right])


def next_eps(err):
    """Accuracy of the next refinement round for a current spread ``1 + err``."""
    return math.sqrt(1 + err) - 1


def refine_eps(problem, instance, interval, eps):
    """Shrink an interval to spread ``1 + eps`` with decreasing decider accuracy."""
    if not 0 < eps:
        raise InputError("eps must be positive")
    x, y = interval.lo, interval.hi
    if x == 0:
        return interval
    while y / x - 1 > eps:
        # never probe finer than the target: either answer then leaves spread <= 1 + eps
        step = max(next_eps(y / x - 1), eps)
        mid = y / (1 + step)
        phi = problem.phi(step)
        ans = _answer(problem, instance, mid, step, phi)
        if isinstance(ans, Below):
            y = mid
        elif isinstance(ans, Above):
            x = mid
        else:
            nx, ny = max(x, ans.lo), min(y, ans.hi)
            if nx > ny:
                raise ContractError("bounded answer disjoint from the current interval")
            x, y = nx, ny
        if step == eps:
            # spread is now 1 + eps up to rounding; another pass would repeat this probe
            break
    return Interval(x, y)


def perturb_rank_stability_check(values, delta, k, jitter):
    """Whether the rank-``k`` value moves by at most ``delta`` under ``jitter``."""
    before = np.sort(np.asarray(values, dtype=float))
    after = np.sort(np.asarray(values, dtype=float) + np.asarray(jitter, dtype=float))
    return bool(abs(before[k - 1] - after[k - 1]) <= delta)
