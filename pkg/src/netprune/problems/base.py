"""Shared plumbing for problem plugins."""

from __future__ import annotations

from ..framework import Above, Below, Bounded


def dual_radius(test, r, slack, shrink):
    """Three-way answer from a one-sided counting test.

    ``test(rho)`` must be True whenever the optimum is at most ``rho`` and may
    only be True when the optimum is at most ``slack * rho``. Evaluating it at
    ``r / shrink`` and at ``r`` brackets the optimum.
    """
    inner = r / shrink
    if test(inner):
        return Below(r)
    if test(r):
        return Bounded(inner, slack * r)
    return Above(r)


class ProblemBase:
    name = "problem"

    def phi(self, eps):
        slack, shrink = self.factors(eps)
        return slack * shrink

    def factors(self, eps):
        return 1 + eps / 4, 1 + eps / 3

    def test(self, points, rho, context, eps):
        raise NotImplementedError

    def decide(self, points, r, context, eps):
        slack, shrink = self.factors(eps)
        return dual_radius(lambda rho: self.test(points, rho, context, eps), r, slack, shrink)

    def prune_context(self, points, close, context):
        return context

    def is_zero(self, points, context):
        return False
