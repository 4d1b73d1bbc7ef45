"""Seeded experiment runner and summary statistics."""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .generator import GeneratorParams, generate_2tsp_instance
from .matrices import EPS
from .sliding import RNDH, LogRow, SlidingParams, gap_percent, two_vrp_heuristic
from .twovrp import Customer, TwoVrpInstance, map_2tsp_to_2vrp

FAMILIES = ("kalmanson-2tsp", "random-2vrp", "external")
DEFAULT_CHECKPOINTS = (1, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100)


def is_optimal(found: float, optimum: Optional[float]) -> bool:
    if optimum is None or not math.isfinite(found):
        return False
    return found <= optimum + EPS * max(1.0, abs(optimum))


@dataclass(frozen=True)
class ExperimentSpec:
    family: str = "kalmanson-2tsp"
    count: int = 1
    n: int = 50
    fixed: int = 30  # |S| for 2TSP families
    capacity: float = 0.0  # per-vehicle capacity for random-2vrp (0: half the demand + 1)
    s: int = 3
    l: int = 1
    restart: str = "full"
    generator: str = RNDH
    repetitions: int = 100
    checkpoints: tuple = DEFAULT_CHECKPOINTS
    seed: int = 0
    stop_at_optimum: bool = False
    paths: tuple = ()  # bundles for the external family
    references: tuple = ()  # optional reference value per instance

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        if not self.checkpoints:
            raise ValueError("no checkpoints")
        cps = tuple(int(c) for c in self.checkpoints)
        if list(cps) != sorted(set(cps)) or cps[0] < 1:
            raise ValueError("checkpoints must be positive and strictly ascending")
        if cps[-1] > self.repetitions:
            raise ValueError("last checkpoint exceeds the number of repetitions")
        object.__setattr__(self, "checkpoints", cps)
        if self.count < 1:
            raise ValueError("count must be positive")
        if self.references and len(self.references) != self.instance_count:
            raise ValueError("need one reference value per instance")

    @property
    def instance_count(self) -> int:
        return len(self.paths) if self.family == "external" else self.count

    @property
    def params(self) -> SlidingParams:
        return SlidingParams(self.s, self.l, self.restart)


@dataclass
class CheckpointStats:
    """Box-plot data of the gap (%) over instances after ``iteration`` repetitions.

    Whiskers follow Tukey: the most extreme gaps within 1.5 IQR of the quartiles.
    """

    iteration: int
    mean: float
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    count_optimal: int
    instances: int


@dataclass
class InstanceRow:
    instance_id: str
    optimum: float
    best_cost: float
    best_gap: float
    repetitions_run: int
    seconds: float
    error: str = ""


@dataclass
class ReferenceSummary:
    """Found values relative to supplied reference values, in percent."""

    mean: float
    best: float
    worst: float
    improved: int
    instances: int


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    checkpoints: list
    instances: list
    log: list = field(default_factory=list)
    reference: Optional[ReferenceSummary] = None


def box_stats(values: Sequence[float]) -> tuple:
    """``(mean, median, q1, q3, whisker_low, whisker_high)`` with Tukey whiskers."""
    x = np.asarray([v for v in values if math.isfinite(v)], dtype=float)
    if x.size == 0:
        return (math.nan,) * 6
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    iqr = q3 - q1
    lo = x[x >= q1 - 1.5 * iqr].min()
    hi = x[x <= q3 + 1.5 * iqr].max()
    return float(x.mean()), float(med), float(q1), float(q3), float(lo), float(hi)


def checkpoint_stats(best_after: list, optima: list, checkpoints: Sequence[int]) -> list:
    """``best_after[k][r-1]`` is instance k's best cost after r repetitions."""
    out = []
    for cp in checkpoints:
        found = [row[min(cp, len(row)) - 1] if row else math.inf for row in best_after]
        gaps = [gap_percent(f, o) for f, o in zip(found, optima)]
        count = sum(is_optimal(f, o) for f, o in zip(found, optima))
        out.append(CheckpointStats(cp, *box_stats(gaps), count, len(found)))
    return out


def reference_summary(found: Sequence[float], references: Sequence[float]) -> ReferenceSummary:
    gaps = [gap_percent(f, r) for f, r in zip(found, references)]
    improved = sum(f <= r + EPS * max(1.0, abs(r)) for f, r in zip(found, references))
    return ReferenceSummary(float(np.mean(gaps)), float(np.min(gaps)), float(np.max(gaps)),
                            int(improved), len(gaps))


def random_2vrp_instance(n: int, seed: int, capacity: float = 0.0) -> TwoVrpInstance:
    """Interval customers on random points in the unit square.

    Vehicle 2 is 20% more expensive per unit distance; about one customer in
    eight is fixed to a vehicle.
    """
    rng = np.random.default_rng(seed)
    pts = rng.random((2 * n + 4, 2))
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    dist = np.round(1000 * dist)
    c1, c2 = dist, np.round(1.2 * dist)
    demand = rng.integers(1, 5, n).astype(float)
    customers = []
    for k in range(n):
        a, b = 4 + 2 * k, 5 + 2 * k
        fixed = int(rng.choice([0, 1, 2], p=[0.75, 0.125, 0.125]))
        customers.append(Customer(a, b, c1[a, b], c1[b, a], c2[a, b], c2[b, a],
                                  demand[k], fixed))
    cap = capacity or float(demand.sum() // 2 + 1)
    return TwoVrpInstance(tuple(customers), 0, 1, 2, 3, cap, cap, c1, c2)


def _build(spec: ExperimentSpec, k: int):
    seed = spec.seed + k
    if spec.family == "kalmanson-2tsp":
        gen = generate_2tsp_instance(GeneratorParams(spec.n, seed=seed), spec.fixed)
        return f"k{spec.n}_{spec.fixed}_{seed}", map_2tsp_to_2vrp(gen.instance), gen.optimum
    if spec.family == "random-2vrp":
        return f"r{spec.n}_{seed}", random_2vrp_instance(spec.n, seed, spec.capacity), None
    from .formats import read_2tsp

    bundle = read_2tsp(spec.paths[k])
    return Path(spec.paths[k]).stem, map_2tsp_to_2vrp(bundle.instance), bundle.optimum


def run_instance(spec: ExperimentSpec, k: int):
    t0 = time.perf_counter()
    try:
        name, inst, optimum = _build(spec, k)
    except Exception as exc:  # reported per instance, the run continues
        return InstanceRow(str(k), math.nan, math.inf, math.nan, 0, 0.0, repr(exc)), [], []
    ref = optimum if optimum is not None else (spec.references[k] if spec.references else None)
    try:
        res = two_vrp_heuristic(inst, spec.params, spec.generator, spec.repetitions,
                                seed=spec.seed + k, optimum=ref, instance_id=name,
                                stop_at=optimum if spec.stop_at_optimum else None)
    except Exception as exc:
        return (InstanceRow(name, ref if ref is not None else math.nan, math.inf, math.nan, 0,
                            time.perf_counter() - t0, repr(exc)), [], [])
    best_after = [res.best_after(r) for r in range(1, res.repetitions_run + 1)]
    row = InstanceRow(name, ref if ref is not None else math.nan, res.best.cost,
                      gap_percent(res.best.cost, ref), res.repetitions_run,
                      time.perf_counter() - t0)
    return row, res.log, best_after


def run_experiment(spec: ExperimentSpec, outdir=None, workers: int = 1) -> ExperimentResult:
    """Run every instance of ``spec``; optionally write CSV artifacts to ``outdir``."""
    ks = range(spec.instance_count)
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(run_instance, [spec] * len(ks), ks))
    else:
        results = [run_instance(spec, k) for k in ks]
    rows = [r[0] for r in results]
    log: list[LogRow] = [x for r in results for x in r[1]]
    best_after = [r[2] for r in results]
    optima = [None if math.isnan(r.optimum) else r.optimum for r in rows]
    stats = checkpoint_stats(best_after, optima, spec.checkpoints)
    reference = None
    if spec.references:
        reference = reference_summary([r.best_cost for r in rows], spec.references)
    result = ExperimentResult(spec, stats, rows, log, reference)
    if outdir is not None:
        write_artifacts(result, outdir)
    return result


def write_artifacts(result: ExperimentResult, outdir) -> None:
    from .formats import write_csv

    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "log.csv", result.log, list(LogRow.__dataclass_fields__))
    write_csv(out / "checkpoints.csv", result.checkpoints, list(CheckpointStats.__dataclass_fields__))
    write_csv(out / "instances.csv", result.instances, list(InstanceRow.__dataclass_fields__))
    if result.reference is not None:
        write_csv(out / "reference.csv", [result.reference],
                  list(ReferenceSummary.__dataclass_fields__))
