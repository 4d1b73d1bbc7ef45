"""Command-line front end: ``tworoute gen | solve | verify | experiment``.

Exit codes: 0 success, 2 infeasible (instance or solution), 3 size guard
exceeded, 4 file or format problem.
"""
from __future__ import annotations

import sys
import time
from pathlib import Path

import click
import numpy as np

from . import formats
from .bench import DEFAULT_CHECKPOINTS, ExperimentSpec, random_2vrp_instance, run_experiment
from .generator import GeneratorParams, generate_2tsp_instance
from .knn_ks import ks_heuristic
from .matrices import permute
from .sliding import KSH, RNDH, SlidingParams, gap_percent, two_vrp_heuristic
from .two_tsp import (InfeasibleError, SizeGuardError, TwoTourSolution, TwoTspInstance,
                      evaluate_solution, oracle_2tsp, solve_balanced_2tsp,
                      solve_balanced_2tsp_lowmem)
from .twovrp import (evaluate_2vrp, map_2tsp_to_2vrp, oracle_2vrp, solve_2vrp_exact,
                     vrp_to_tours)

EXIT_INFEASIBLE, EXIT_GUARD, EXIT_IO = 2, 3, 4

TSP_MODES = ("2tsp-exact", "2tsp-lowmem", "2tsp-oracle", "ks")
VRP_MODES = ("2vrp-exact", "2vrp-oracle", "heuristic")


def _fail(msg: str, code: int):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def _guarded(fn):
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except InfeasibleError as exc:
            _fail(f"infeasible: {exc}", EXIT_INFEASIBLE)
        except SizeGuardError as exc:
            _fail(f"size guard: {exc}", EXIT_GUARD)
        except (formats.FormatError, OSError) as exc:
            _fail(str(exc), EXIT_IO)
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _is_tsp_file(path) -> bool:
    try:
        with open(path) as fh:
            return fh.readline().strip() == formats.TSP_HEADER
    except OSError as exc:
        raise formats.FormatError(str(exc)) from exc


def _report(cost: float, optimum, seconds: float) -> str:
    gap = "" if optimum is None else f" gap={gap_percent(cost, optimum):.3f}%"
    return f"cost={cost!r}{gap} time={seconds:.3f}s"


@click.group()
def main():
    """Balanced two-period TSP and two-vehicle routing solvers."""


@main.command()
@click.option("--family", type=click.Choice(["kalmanson-2tsp", "random-2vrp"]),
              default="kalmanson-2tsp", show_default=True)
@click.option("--n", "n", type=int, required=True, help="Nodes (2TSP) or customers (2VRP).")
@click.option("--fixed", type=int, default=1, show_default=True,
              help="Nodes visited in both periods, node 1 included.")
@click.option("--count", type=int, default=1, show_default=True)
@click.option("--seed", type=int, required=True, help="Seed of the first instance; +1 per instance.")
@click.option("--low", type=float, default=0.1, show_default=True)
@click.option("--high", type=float, default=1.1, show_default=True)
@click.option("--blind", is_flag=True, help="Omit the optimum and the hidden order.")
@click.option("--out", "outdir", type=click.Path(file_okay=False), default=".", show_default=True)
@_guarded
def gen(family, n, fixed, count, seed, low, high, blind, outdir):
    """Write generated instances."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    for k in range(count):
        s = seed + k
        if family == "kalmanson-2tsp":
            g = generate_2tsp_instance(GeneratorParams(n, (low, high), seed=s), fixed)
            path = out / f"k{n}_{fixed}_{s}.tsp2"
            formats.write_2tsp(path, g.instance, None if blind else g.optimum,
                               None if blind else g.hidden_order)
        else:
            path = out / f"r{n}_{s}.vrp2"
            formats.write_2vrp(path, random_2vrp_instance(n, s))
        click.echo(str(path))


def _hidden_ordered(bundle):
    """The bundle's instance relabeled by its hidden order (if it has one)."""
    inst, order = bundle.instance, bundle.hidden_order
    if order is None:
        return inst, None
    pos = np.empty(len(order), dtype=np.int64)
    pos[order] = np.arange(len(order))
    ordered = TwoTspInstance(permute(inst.matrix, order), frozenset(int(pos[s]) for s in inst.fixed),
                             near_balanced=inst.near_balanced)
    return ordered, order


def _exact_tsp(bundle) -> TwoTourSolution:
    ordered, order = _hidden_ordered(bundle)
    sol = solve_balanced_2tsp(ordered)
    if order is None:
        return sol
    return TwoTourSolution.from_tours(bundle.instance.matrix, [int(order[x]) for x in sol.tour1],
                                      [int(order[x]) for x in sol.tour2])


@main.command()
@click.argument("mode", type=click.Choice(TSP_MODES + VRP_MODES))
@click.argument("instance", type=click.Path())
@click.option("--out", type=click.Path(dir_okay=False), help="Solution file to write.")
@click.option("--s", "s", type=int, default=3, show_default=True, help="Window size of H(s,l).")
@click.option("--l", "l", type=int, default=1, show_default=True, help="Window step of H(s,l).")
@click.option("--restart", type=click.Choice(["full", "continue"]), default="full", show_default=True)
@click.option("--generator", type=click.Choice([RNDH, KSH]), default=RNDH, show_default=True)
@click.option("--repetitions", type=int, default=10, show_default=True)
@click.option("--seed", type=int, help="Required for the heuristic.")
@_guarded
def solve(mode, instance, out, s, l, restart, generator, repetitions, seed):
    """Solve INSTANCE (a 2TSP bundle or a 2VRP file) with MODE.

    2tsp-exact and 2tsp-lowmem use the bundle's hidden order when present;
    without it the result is exact only if the matrix is already in
    Kalmanson order. 2tsp-lowmem reports the value only.
    """
    t0 = time.perf_counter()
    optimum = None
    if _is_tsp_file(instance):
        bundle = formats.read_2tsp(instance)
        tsp, optimum = bundle.instance, bundle.optimum
        vrp = map_2tsp_to_2vrp(tsp)
    else:
        if mode in TSP_MODES:
            raise formats.FormatError(f"{mode} needs a 2TSP bundle")
        tsp, vrp = None, formats.read_2vrp(instance)
    if mode in TSP_MODES:
        if mode == "2tsp-exact":
            sol = _exact_tsp(bundle)
        elif mode == "2tsp-lowmem":
            value = solve_balanced_2tsp_lowmem(_hidden_ordered(bundle)[0])
            click.echo(_report(value, optimum, time.perf_counter() - t0))
            return
        elif mode == "2tsp-oracle":
            sol = oracle_2tsp(tsp)
        else:
            sol = ks_heuristic(tsp)
        if out:
            formats.write_tours(out, sol)
        click.echo(_report(sol.total, optimum, time.perf_counter() - t0))
        return
    if mode == "2vrp-exact":
        vsol = solve_2vrp_exact(vrp)
    elif mode == "2vrp-oracle":
        vsol = oracle_2vrp(vrp)
    else:
        if seed is None:
            raise click.UsageError("--seed is required for the heuristic")
        res = two_vrp_heuristic(vrp, SlidingParams(s, l, restart), generator, repetitions,
                                seed=seed, optimum=optimum)
        vsol = res.best
    if out:
        if tsp is not None:
            formats.write_tours(out, vrp_to_tours(vrp, vsol))
        else:
            formats.write_vrp_solution(out, vsol)
    click.echo(_report(vsol.cost, optimum, time.perf_counter() - t0))


@main.command()
@click.argument("instance", type=click.Path())
@click.argument("solution", type=click.Path())
@_guarded
def verify(instance, solution):
    """Check SOLUTION against INSTANCE and recompute its cost."""
    if _is_tsp_file(instance):
        bundle = formats.read_2tsp(instance)
        ev = evaluate_solution(bundle.instance, formats.read_tours(solution))
        cost = ev.total
        optimum = bundle.optimum
    else:
        inst = formats.read_2vrp(instance)
        ev = evaluate_2vrp(inst, formats.read_vrp_solution(solution, inst))
        cost, optimum = ev.cost, None
    if not ev.feasible:
        for v in ev.violations:
            click.echo(v)
        sys.exit(EXIT_INFEASIBLE)
    click.echo("feasible " + _report(cost, optimum, 0.0).rsplit(" time=", 1)[0])


@main.command()
@click.option("--family", type=click.Choice(["kalmanson-2tsp", "random-2vrp", "external"]),
              default="kalmanson-2tsp", show_default=True)
@click.option("--count", type=int, default=1, show_default=True)
@click.option("--n", "n", type=int, default=50, show_default=True)
@click.option("--fixed", type=int, default=30, show_default=True)
@click.option("--s", "s", type=int, default=3, show_default=True)
@click.option("--l", "l", type=int, default=1, show_default=True)
@click.option("--restart", type=click.Choice(["full", "continue"]), default="full", show_default=True)
@click.option("--generator", type=click.Choice([RNDH, KSH]), default=RNDH, show_default=True)
@click.option("--repetitions", type=int, default=100, show_default=True)
@click.option("--checkpoints", default=",".join(map(str, DEFAULT_CHECKPOINTS)), show_default=True,
              help="Comma-separated repetition counts to summarise.")
@click.option("--seed", type=int, required=True)
@click.option("--stop-at-optimum", is_flag=True, help="Stop an instance once its optimum is reached.")
@click.option("--references", type=click.Path(dir_okay=False),
              help="CSV with a 'value' column, one row per instance.")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", "outdir", type=click.Path(file_okay=False), required=True)
@click.argument("paths", nargs=-1, type=click.Path())
@_guarded
def experiment(family, count, n, fixed, s, l, restart, generator, repetitions, checkpoints, seed,
               stop_at_optimum, references, workers, outdir, paths):
    """Run the repeated heuristic on a family of instances and write CSV summaries."""
    cps = tuple(int(x) for x in checkpoints.split(",") if x.strip())
    refs = tuple(float(r["value"]) for r in formats.read_csv(references)) if references else ()
    try:
        spec = ExperimentSpec(family, count, n, fixed, 0.0, s, l, restart, generator, repetitions,
                              cps, seed, stop_at_optimum, tuple(paths), refs)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    result = run_experiment(spec, outdir, workers)
    click.echo("iteration mean median q1 q3 count_optimal")
    for cp in result.checkpoints:
        click.echo(f"{cp.iteration} {cp.mean:.4f} {cp.median:.4f} {cp.q1:.4f} {cp.q3:.4f} "
                   f"{cp.count_optimal}/{cp.instances}")
    if result.reference is not None:
        r = result.reference
        click.echo(f"mean% {r.mean:.2f} best% {r.best:.2f} worst% {r.worst:.2f} "
                   f"improved {r.improved}/{r.instances}")
    failed = [row for row in result.instances if row.error]
    for row in failed:
        click.echo(f"instance {row.instance_id} failed: {row.error}", err=True)


if __name__ == "__main__":
    main()
