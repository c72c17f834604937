"""Command-line front end.

Every solver subcommand reads a point file (``-`` for stdin) and prints one
JSON report. Exit codes: 0 ok, 2 usage, 3 bad input, 4 infeasible, 5 internal
contract violation.
"""

from __future__ import annotations

import json
import math
import sys
import time

import click
import numpy as np

from . import hiprob
from .errors import InputError, NetPruneError
from .framework import prepare
from .io import DISTRIBUTIONS, format_points, generate, read_points
from .problems import oracles
from .problems import clusters, connectivity, kcenter, nonzero, ranks
from .problems.sketches import FAMILY_NAMES, family_from_name

SCHEMA = 1
ORACLE_CAP = 2000
EXHAUSTIVE_CAP = 10
SUPPORT_CAP = 60


def _emit(report):
    click.echo(json.dumps(report, sort_keys=True))


def _fail(exc):
    click.echo(f"error: {exc}", err=True)
    sys.exit(exc.exit_code)


def _trace_summary(trace, want_trace):
    if trace is None:
        return 0, {"net": 0, "prune": 0, "return": 0}, None
    steps = [s.as_dict() for s in trace.steps] if want_trace else None
    return len(trace), trace.actions(), steps


def _interval(iv):
    return None if iv is None else [iv.lo, iv.hi]


def _report(problem, params, value, interval, trace, seed, started, note, want_trace, hp):
    iterations, actions, steps = _trace_summary(trace, want_trace)
    report = {
        "schema": SCHEMA,
        "problem": problem,
        "params": params,
        "value": value,
        "interval": _interval(interval),
        "iterations": iterations,
        "actions": actions,
        "seed": seed,
        "elapsed_s": round(time.perf_counter() - started, 6),
        "note": note,
        "hp": hp,
    }
    if want_trace:
        report["trace"] = steps
    return report


def _family(opts, pf):
    name = opts["family"]
    if name is None:
        raise InputError("--family is required for this problem")
    num_colors = int(pf.colors.max()) + 1 if pf.colors is not None else None
    if name in ("all-colors", "min-colors") and num_colors is None:
        raise InputError("color families need a color column")
    matrix = bounds = None
    if name == "linear":
        if not opts["ineq"]:
            raise InputError("family linear needs at least one --ineq")
        rows = []
        for entry in opts["ineq"]:
            lhs, _, rhs = entry.partition(":")
            try:
                rows.append(([float(x) for x in lhs.split(",")], float(rhs)))
            except ValueError:
                raise InputError(f"bad --ineq {entry!r}; expected a1,a2,...:bound") from None
        matrix = [r[0] for r in rows]
        bounds = [r[1] for r in rows]
    return family_from_name(name, k=opts["k"], alpha=opts["alpha"], num_colors=num_colors,
                            min_colors=opts["colors_min"], matrix=matrix, bounds=bounds)


def _need(opts, key, flag):
    if opts[key] is None:
        raise InputError(f"{flag} is required for this problem")
    return opts[key]


def _solve(problem, pf, opts):
    """Dispatch one problem; returns (value, interval, trace, note)."""
    seed = opts["seed"]
    eps = opts["eps"]
    sampler = hiprob.hp_radius_sampler() if opts["hp"] else None
    pts = pf.pointset()
    if problem == "kcenter":
        res = kcenter.kcenter_2approx(pts, _need(opts, "k", "--k"), seed=seed)
        note = "zero screen" if res.trace.screened_zero else ""
        return res.radius, res.interval, res.trace, note
    if problem == "kth-dist":
        res = ranks.kth_distance(pts, _need(opts, "k", "--k"), eps, seed, sampler)
    elif problem == "kth-mnn":
        res = ranks.kth_mnn(pts, _need(opts, "k", "--k"), opts["m"], eps, seed, sampler)
    elif problem == "knn-exact":
        res = ranks.exact_kth_nn(pts, _need(opts, "k", "--k"), seed, sampler)
    elif problem == "furthest-nn":
        res = ranks.furthest_nn(pts, seed, sampler)
    elif problem == "closest-pair":
        res = ranks.closest_pair(pts, seed, sampler)
    elif problem == "mst-kth-edge":
        res = connectivity.mst_kth_edge(pts, _need(opts, "k", "--k"), eps, seed,
                                        shortest=opts["shortest"], sampler=sampler)
    elif problem == "nonzero-dist":
        value = nonzero.smallest_nonzero_distance(pts, seed)
        return value, None, None, "exact"
    else:
        family = _family(opts, pf)
        solver = {
            "min-ball": clusters.min_ball,
            "min-component": clusters.min_component,
            "minmax-cluster": clusters.minmax_cluster,
            "connected-cluster": clusters.connected_cluster,
        }[problem]
        res = solver(pts, family, pf.attributes(), eps=eps, seed=seed, sampler=sampler)
    return res.value, res.interval, res.trace, res.note


def _params(opts):
    keep = ("k", "m", "eps", "family", "alpha", "colors_min", "shortest", "ineq")
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in opts.items()
            if k in keep and v not in (None, (), False)}


def run_options(fn):
    options = [
        click.argument("path", type=click.Path(allow_dash=True)),
        click.option("--k", type=int, default=None, help="Rank or number of centers."),
        click.option("--m", type=int, default=1, show_default=True, help="Neighbor order for kth-mnn."),
        click.option("--eps", type=float, default=0.1, show_default=True, help="Target accuracy."),
        click.option("--family", type=click.Choice(FAMILY_NAMES), default=None, help="Sketch family."),
        click.option("--alpha", type=float, default=None, help="Threshold of weight-at-least."),
        click.option("--colors-min", "colors_min", type=int, default=None, help="Colors needed by min-colors."),
        click.option("--ineq", multiple=True, help="Inequality a1,a2,...:bound for the linear family."),
        click.option("--shortest", is_flag=True, help="k-th shortest instead of k-th longest MST edge."),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--hp", is_flag=True, help="Probe radii from the high-probability routine."),
        click.option("--trace", is_flag=True, help="Include the per-iteration driver trace."),
    ]
    for opt in reversed(options):
        fn = opt(fn)
    return fn


PROBLEMS = ("kcenter", "kth-dist", "kth-mnn", "knn-exact", "furthest-nn", "mst-kth-edge",
            "min-ball", "min-component", "minmax-cluster", "connected-cluster",
            "closest-pair", "nonzero-dist")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def main():
    """Net & Prune approximation for distance problems on point sets."""


def _make_command(problem):
    @run_options
    def command(path, **opts):
        started = time.perf_counter()
        try:
            pf = read_points(path)
            if opts["eps"] is not None and not (0 < opts["eps"] <= 1):
                raise InputError("--eps must lie in (0, 1]")
            value, interval, trace, note = _solve(problem, pf, opts)
        except NetPruneError as exc:
            _fail(exc)
        _emit(_report(problem, _params(opts), value, interval, trace, opts["seed"], started,
                      note, opts["trace"], opts["hp"]))

    command.__doc__ = f"Solve {problem} on the points in PATH."
    return click.command(problem)(command)


for _name in PROBLEMS:
    main.add_command(_make_command(_name))


@main.command("gen")
@click.argument("distribution", type=click.Choice(DISTRIBUTIONS))
@click.option("--n", type=int, required=True)
@click.option("--d", "dim", type=int, default=2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--output", "-o", type=click.Path(allow_dash=True), default="-", show_default=True)
def gen_command(distribution, n, dim, seed, output):
    """Write a reproducible synthetic point file."""
    try:
        text = format_points(generate(distribution, n, dim, seed))
    except NetPruneError as exc:
        _fail(exc)
    if output == "-":
        click.echo(text, nl=False)
    else:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _oracle_value(problem, pf, opts):
    coords, weights = pf.coords, pf.weights
    units = int(weights.sum())
    n = len(coords)
    cap = opts["cap"]
    limit = {"kcenter": EXHAUSTIVE_CAP, "minmax-cluster": EXHAUSTIVE_CAP,
             "min-ball": SUPPORT_CAP}.get(problem, cap)
    if max(units, n) > limit:
        raise InputError(f"oracle for {problem} is capped at {limit} points")
    if problem == "kcenter":
        return oracles.kcenter(coords, _need(opts, "k", "--k"))
    if problem == "kth-dist":
        return oracles.kth_distance(coords, _need(opts, "k", "--k"), weights)
    if problem == "kth-mnn":
        return oracles.kth_mnn(coords, _need(opts, "k", "--k"), opts["m"], weights)
    if problem == "knn-exact":
        return float(oracles.nn_values(coords, weights)[_need(opts, "k", "--k") - 1])
    if problem == "furthest-nn":
        return float(oracles.nn_values(coords, weights)[-1])
    if problem == "closest-pair":
        return float(oracles.nn_values(coords, weights)[0])
    if problem == "nonzero-dist":
        return oracles.smallest_nonzero(coords)
    if problem == "mst-kth-edge":
        k = _need(opts, "k", "--k")
        if opts["shortest"]:
            return oracles.mst_kth_shortest(coords, k, weights)
        return oracles.mst_kth_longest(coords, k, weights)
    family = _family(opts, pf)
    merged = prepare(clusters.attach_sketches(pf.pointset(), family, pf.attributes()))
    fn = {
        "min-ball": oracles.min_ball,
        "min-component": oracles.min_component,
        "minmax-cluster": oracles.minmax_cluster,
        "connected-cluster": oracles.connected_cluster,
    }[problem]
    return fn(merged.coords, merged.payload, family)


@main.command("oracle")
@click.argument("problem", type=click.Choice(PROBLEMS))
@run_options
@click.option("--cap", type=int, default=ORACLE_CAP, show_default=True, help="Largest input accepted.")
def oracle_command(problem, path, cap, **opts):
    """Exact brute-force answer for PROBLEM on the points in PATH."""
    started = time.perf_counter()
    opts["cap"] = cap
    try:
        pf = read_points(path)
        value = _oracle_value(problem, pf, opts)
    except NetPruneError as exc:
        _fail(exc)
    if not math.isfinite(value):
        _fail(InputError("the problem has no finite answer on this input"))
    report = _report(problem, _params(opts), float(value), None, None, opts["seed"], started,
                     "oracle", False, False)
    _emit(report)


if __name__ == "__main__":  # pragma: no cover
    main()
