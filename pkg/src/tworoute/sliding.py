"""Sliding-subset local search H(s, l) and the repeated two-vehicle heuristic.

An incumbent is cut into a small two-vehicle problem: two windows of ``s``
consecutive customers stay as they are, the stretches between and after
them become aggregated customers, the stretch before the first window is
glued to the start depot, and the separator customer 0 stays on its own.
The small problem is solved exactly and, if that strictly improves the
incumbent, the search starts again from the first window.
"""
from __future__ import annotations

import bisect
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numba
import numpy as np

from .matrices import EPS
from .pyramidal import belperm
from .two_tsp import InfeasibleError
from .twovrp import (FREE, LEFT, RIGHT, Customer, TwoVrpInstance, TwoVrpSolution, _subset_dp,
                     capacity_ok, evaluate_2vrp, make_solution, max_subset_bits, solve_2vrp_exact,
                     tours_to_vrp)

KSH, RNDH = "KSH", "RndH"


@dataclass(frozen=True)
class SlidingParams:
    """``restart`` selects what happens after an improving window: ``"full"``
    starts the enumeration over, ``"continue"`` resumes at the same window
    position and stops once a whole cycle of windows brings nothing."""

    s: int
    l: int
    restart: str = "full"

    def __post_init__(self):
        if self.s < 1 or self.l < 1:
            raise ValueError("s and l must be at least 1")
        if self.restart not in ("full", "continue"):
            raise ValueError("restart must be 'full' or 'continue'")
        if 2 * self.s + 4 > max_subset_bits():
            raise ValueError(f"H({self.s},{self.l}) needs {2 * self.s + 4} subset bits, "
                             f"limit is {max_subset_bits()}")

    @property
    def target_size(self) -> int:
        """Customers of a sub-problem, counting both depots and customer 0."""
        return 2 * self.s + 6


def _flip(d: str) -> str:
    return RIGHT if d == LEFT else LEFT


def _improves(new: float, old: float) -> bool:
    return new < old - EPS * max(1.0, abs(old))


# --------------------------------------------------------------------------
# aggregation


@dataclass(frozen=True)
class AggregatedCustomer:
    customer: Customer
    members: tuple  # (customer_id, direction) in forward order


def aggregate_subpath(inst: TwoVrpInstance, subpath: Sequence) -> AggregatedCustomer:
    """Replace a directed subpath by one customer with the same traversal costs."""
    path = [(int(c), str(d)) for c, d in subpath]
    if not path:
        raise ValueError("subpath must not be empty")
    cus = [inst.customer(c) for c, _ in path]
    fixed = {cu.fixed_to for cu in cus} - {FREE}
    if len(fixed) > 1:
        raise ValueError("subpath mixes customers fixed to different vehicles")

    def walk(vehicle, steps):
        c = inst.matrix(vehicle)
        terms = []
        for k, (cu, d) in enumerate(steps):
            terms.append(cu.internal(d, vehicle))
            if k + 1 < len(steps):
                nxt, nd = steps[k + 1]
                terms.append(float(c[cu.exit(d), nxt.entry(nd)]))
        return math.fsum(terms)

    fwd = [(cu, d) for cu, (_, d) in zip(cus, path)]
    rev = [(cu, _flip(d)) for cu, d in reversed(fwd)]
    agg = Customer(
        left=fwd[0][0].entry(fwd[0][1]),
        right=fwd[-1][0].exit(fwd[-1][1]),
        l1_left=walk(1, fwd), l1_right=walk(1, rev),
        l2_left=walk(2, fwd), l2_right=walk(2, rev),
        demand=math.fsum(cu.demand for cu in cus),
        fixed_to=fixed.pop() if fixed else FREE,
    )
    return AggregatedCustomer(agg, tuple(path))


@numba.njit(cache=True)
def _build_items(starts, ends, entry, exit_, f1, f2, r1, r2, w, fixed, c1, c2, d1e, d2s):
    m = starts.shape[0] + 1
    ln = np.empty(m, dtype=np.int64)
    rn = np.empty(m, dtype=np.int64)
    a1l = np.empty(m)
    a1r = np.empty(m)
    a2l = np.empty(m)
    a2r = np.empty(m)
    wd = np.empty(m)
    fx = np.empty(m, dtype=np.int64)
    ln[0] = d1e
    rn[0] = d2s
    a1l[0] = 0.0
    a1r[0] = np.inf
    a2l[0] = 0.0
    a2r[0] = np.inf
    wd[0] = 0.0
    fx[0] = 0
    for k in range(starts.shape[0]):
        p, q = starts[k], ends[k]
        t = k + 1
        ln[t] = entry[p]
        rn[t] = exit_[q - 1]
        s1l = 0.0
        s1r = 0.0
        s2l = 0.0
        s2r = 0.0
        ww = 0.0
        ff = 0
        for x in range(p, q):
            s1l += f1[x]
            s2l += f2[x]
            s1r += r1[x]
            s2r += r2[x]
            ww += w[x]
            if fixed[x] != 0:
                ff = fixed[x]
            if x + 1 < q:
                s1l += c1[exit_[x], entry[x + 1]]
                s2l += c2[exit_[x], entry[x + 1]]
                s1r += c1[entry[x + 1], exit_[x]]
                s2r += c2[entry[x + 1], exit_[x]]
        a1l[t] = s1l
        a1r[t] = s1r
        a2l[t] = s2l
        a2r[t] = s2r
        wd[t] = ww
        fx[t] = ff
    return ln, rn, a1l, a1r, a2l, a2r, wd, fx


class _Flat:
    """Per-position arrays of the concatenated routes (route1 then route2)."""

    def __init__(self, inst: TwoVrpInstance, sol: TwoVrpSolution):
        steps = list(sol.route1) + list(sol.route2)
        self.steps = steps
        self.k1 = len(sol.route1)
        self.n = len(steps)
        cus = [inst.customer(c) for c, _ in steps]
        self.entry = np.array([cu.entry(d) for cu, (_, d) in zip(cus, steps)], dtype=np.int64)
        self.exit = np.array([cu.exit(d) for cu, (_, d) in zip(cus, steps)], dtype=np.int64)
        self.f1 = np.array([cu.internal(d, 1) for cu, (_, d) in zip(cus, steps)])
        self.f2 = np.array([cu.internal(d, 2) for cu, (_, d) in zip(cus, steps)])
        self.r1 = np.array([cu.internal(_flip(d), 1) for cu, (_, d) in zip(cus, steps)])
        self.r2 = np.array([cu.internal(_flip(d), 2) for cu, (_, d) in zip(cus, steps)])
        self.w = np.array([cu.demand for cu in cus])
        self.fixed = np.array([cu.fixed_to for cu in cus], dtype=np.int64)
        # lead[a]: vehicle-1 cost from its depot through positions 0..a-1
        lead = np.zeros(self.k1 + 1)
        lead_w = np.zeros(self.k1 + 1)
        if self.k1:
            c1 = inst.c1
            arcs = np.empty(self.k1)
            arcs[0] = c1[inst.d1_start, self.entry[0]]
            arcs[1:] = c1[self.exit[:self.k1 - 1], self.entry[1:self.k1]]
            lead[1:] = np.cumsum(arcs + self.f1[:self.k1])
            lead_w[1:] = np.cumsum(self.w[:self.k1])
        self.lead = lead
        self.lead_w = lead_w

    def expand(self, piece: tuple, d: str) -> list:
        p, q = piece
        seg = self.steps[p:q]
        if d == LEFT:
            return list(seg)
        return [(c, _flip(x)) for c, x in reversed(seg)]


def _window_pieces(a: int, b: int, s: int, n: int, k1: int) -> list:
    pieces = [(x, x + 1) for x in range(a, a + s)]
    gaps = []
    for lo, hi in ((a + s, b), (b + s, n)):
        if lo < k1 < hi:
            gaps += [(lo, k1), (k1, hi)]
        elif lo < hi:
            gaps.append((lo, hi))
    if len(gaps) < 3:
        # split the last customer off a gap so the sub-problem keeps its size
        mid = [g for g in gaps if g[1] <= b and g[1] - g[0] >= 2]
        tail = [g for g in gaps if g[0] >= b + s and g[1] - g[0] >= 2]
        pick = (mid or tail or [None])[-1 if mid else 0]
        if pick is not None:
            k = gaps.index(pick)
            gaps[k:k + 1] = [(pick[0], pick[1] - 1), (pick[1] - 1, pick[1])]
    mid = [g for g in gaps if g[1] <= b]
    tail = [g for g in gaps if g[0] >= b + s]
    return pieces + mid + [(x, x + 1) for x in range(b, b + s)] + tail


def _windows(s: int, l: int, n: int, k1: int):
    k2 = n - k1
    for a in range(0, k1, l):
        if a + 2 * s > n:
            break
        b0 = max(a + s, k1 - s + 1) if k2 > 0 else a + s
        for b in range(b0, n - s + 1, l):
            yield a, b


def solve_window(inst, flat: _Flat, a: int, b: int, s: int, mats):
    """Solve the sub-problem of windows starting at positions ``a`` and ``b``.

    Returns ``(value, candidate)``: the sub-problem optimum plus the cost of
    the untouched leading stretch, and the expanded full solution (``None``
    if the sub-problem is infeasible).
    """
    c1, c2 = mats
    pieces = _window_pieces(a, b, s, flat.n, flat.k1)
    starts = np.array([p for p, _ in pieces], dtype=np.int64)
    ends = np.array([q for _, q in pieces], dtype=np.int64)
    arrays = _build_items(starts, ends, flat.entry, flat.exit, flat.f1, flat.f2, flat.r1, flat.r2,
                          flat.w, flat.fixed, c1, c2, inst.d1_end, inst.d2_start)
    d1s = inst.d1_start if a == 0 else int(flat.exit[a - 1])
    cap1 = inst.cap1 - flat.lead_w[a]
    allow_empty = inst.allow_empty_vehicle1 or a > 0
    tol1 = EPS * max(1.0, abs(inst.cap1))
    tol2 = EPS * max(1.0, abs(inst.cap2))
    value, seq, dirs = _subset_dp(*arrays, c1, c2, d1s, inst.d2_end, cap1, inst.cap2,
                                  tol1, tol2, allow_empty)
    if not np.isfinite(value):
        return math.inf, None
    order = [int(i) for i in seq]
    k = order.index(0)
    routes = ([], [])
    for pos, (item, d) in enumerate(zip(order, dirs)):
        if item == 0:
            continue
        routes[pos > k].extend(flat.expand(pieces[item - 1], LEFT if d == 0 else RIGHT))
    return value + flat.lead[a], make_solution(inst, flat.steps[:a] + routes[0], routes[1])


def _try_window(inst, flat: _Flat, a: int, b: int, s: int, cur: float, mats):
    value, cand = solve_window(inst, flat, a, b, s, mats)
    if cand is None or not _improves(value, cur):
        return None
    if not _improves(cand.cost, cur) or not evaluate_2vrp(inst, cand).feasible:
        return None
    return cand


def sliding_subset_search(inst: TwoVrpInstance, incumbent: TwoVrpSolution,
                          params: SlidingParams) -> TwoVrpSolution:
    """Improve ``incumbent`` with H(s, l) until no window pair helps.

    Windows: the first starts in route 1 and advances by ``l``; for each
    such position the second window starts right after it (but late
    enough to reach route 2) and slides by ``l`` to the end. Any strict
    improvement restarts the enumeration on the new solution.
    """
    s, l = params.s, params.l
    sol = incumbent
    mats = (np.ascontiguousarray(inst.c1), np.ascontiguousarray(inst.c2))
    if inst.n + 1 <= 2 * s + 4:
        try:
            best = solve_2vrp_exact(inst)
        except InfeasibleError:
            return sol
        return best if _improves(best.cost, sol.cost) else sol
    if params.restart == "full":
        while True:
            flat = _Flat(inst, sol)
            found = None
            for a, b in _windows(s, l, flat.n, flat.k1):
                found = _try_window(inst, flat, a, b, s, sol.cost, mats)
                if found is not None:
                    break
            if found is None:
                return sol
            sol = found
    flat = _Flat(inst, sol)
    windows = list(_windows(s, l, flat.n, flat.k1))
    idx = since = 0
    while since < len(windows):
        a, b = windows[idx]
        found = _try_window(inst, flat, a, b, s, sol.cost, mats)
        if found is None:
            since += 1
            idx = (idx + 1) % len(windows)
            continue
        sol = found
        flat = _Flat(inst, sol)
        windows = list(_windows(s, l, flat.n, flat.k1))
        # the window just solved is optimal for the new solution; move past it
        idx = bisect.bisect_right(windows, (a, b)) % len(windows)
        since = 1
    return sol


# --------------------------------------------------------------------------
# route improvement and start solutions


def _route_matrix(inst: TwoVrpInstance, route, vehicle: int) -> np.ndarray:
    c = inst.matrix(vehicle)
    start, end = (inst.d1_start, inst.d1_end) if vehicle == 1 else (inst.d2_start, inst.d2_end)
    cus = [inst.customer(cid) for cid, _ in route]
    ent = np.array([cu.entry(d) for cu, (_, d) in zip(cus, route)], dtype=np.int64)
    ext = np.array([cu.exit(d) for cu, (_, d) in zip(cus, route)], dtype=np.int64)
    k = len(route)
    m = np.zeros((k + 1, k + 1))
    m[0, 1:] = c[start, ent]
    m[1:, 0] = c[ext, end]
    m[1:, 1:] = c[np.ix_(ext, ent)]
    np.fill_diagonal(m, 0.0)
    return m


def improve_routes(inst: TwoVrpInstance, sol: TwoVrpSolution) -> TwoVrpSolution:
    """Reorder each route with BELPERM, keeping assignments and directions.

    The depot pair of a route acts as one city, so open paths are handled
    as tours through a zero-length closing link.
    """
    routes = [list(sol.route1), list(sol.route2)]
    for v in (1, 2):
        route = routes[v - 1]
        if len(route) < 3:
            continue
        tour = belperm(_route_matrix(inst, route, v))
        routes[v - 1] = [route[x - 1] for x in tour.nodes[1:]]
    cand = make_solution(inst, *routes)
    return cand if _improves(cand.cost, sol.cost) else sol


def random_solution(inst: TwoVrpInstance, rng: np.random.Generator,
                    max_tries: int = 1000) -> TwoVrpSolution:
    """Random feasible start: fixed customers go to their vehicle, the rest
    in shuffled order to a random vehicle with room; random order and
    random finite-cost directions within each route."""
    ids = np.arange(1, inst.n + 1)
    caps = (inst.cap1, inst.cap2)
    for _ in range(max_tries):
        routes: tuple = ([], [])
        loads = [0.0, 0.0]
        ok = True
        fixed = [c for c in ids if inst.customer(c).fixed_to != FREE]
        free = [c for c in ids if inst.customer(c).fixed_to == FREE]
        for cid in list(rng.permutation(fixed)) + list(rng.permutation(free)):
            cu = inst.customer(int(cid))
            if cu.fixed_to != FREE:
                options = [cu.fixed_to]
            else:
                options = [v for v in (1, 2) if capacity_ok(loads[v - 1] + cu.demand, caps[v - 1])]
            if not options or not capacity_ok(loads[options[0] - 1] + cu.demand, caps[options[0] - 1]):
                ok = False
                break
            v = options[int(rng.integers(len(options)))]
            dirs = [d for d in (LEFT, RIGHT) if math.isfinite(cu.internal(d, v))]
            if not dirs:
                ok = False
                break
            routes[v - 1].append((int(cid), dirs[int(rng.integers(len(dirs)))]))
            loads[v - 1] += cu.demand
        if not ok:
            continue
        r1 = [routes[0][k] for k in rng.permutation(len(routes[0]))]
        r2 = [routes[1][k] for k in rng.permutation(len(routes[1]))]
        sol = make_solution(inst, r1, r2)
        if evaluate_2vrp(inst, sol).feasible:
            return sol
    raise InfeasibleError(f"no random feasible solution after {max_tries} tries")


def ks_solution(inst: TwoVrpInstance, start: int) -> TwoVrpSolution:
    """KS start solution for a mapped balanced 2TSP (``inst.source``)."""
    from .knn_ks import ks_start

    if inst.source is None:
        raise ValueError("KSH needs an instance mapped from a balanced 2TSP")
    return tours_to_vrp(inst, ks_start(inst.source, start))


# --------------------------------------------------------------------------
# outer heuristic


@dataclass
class LogRow:
    instance_id: str
    repetition: int
    iteration: int
    best_cost: float
    gap_percent: float
    elapsed_ms: float


@dataclass
class HeuristicResult:
    best: TwoVrpSolution
    log: list = field(default_factory=list)
    repetitions_run: int = 0

    def best_after(self, repetitions: int) -> float:
        """Best cost known at the end of the given repetition (1-based)."""
        rows = [r for r in self.log if r.repetition <= repetitions]
        return min(r.best_cost for r in rows) if rows else math.inf


def gap_percent(found: float, optimum: Optional[float]) -> float:
    if optimum is None or not math.isfinite(found):
        return math.nan
    return 100.0 * (found - optimum) / optimum


Observer = Callable[[str, TwoVrpSolution, TwoVrpSolution], None]


def two_vrp_heuristic(inst: TwoVrpInstance, params: SlidingParams, generator: str = RNDH,
                      repetitions: int = 1, seed: int = 0, optimum: Optional[float] = None,
                      stop_at: Optional[float] = None, instance_id: str = "",
                      observer: Optional[Observer] = None) -> HeuristicResult:
    """Repeat: generate a start, then alternate H(s, l) and per-route BELPERM
    until neither improves; keep the best solution.

    ``generator`` is ``"RndH"`` (random starts, one seed per repetition
    spawned from ``seed``) or ``"KSH"`` (the KS solution for start node
    ``1 + r mod (n-1)`` of the source 2TSP). ``stop_at`` ends the run as
    soon as the best cost reaches that value. ``observer`` is called as
    ``observer(stage, before, after)`` after every improvement step.
    """
    if generator not in (KSH, RNDH):
        raise ValueError(f"generator must be {KSH!r} or {RNDH!r}")
    if generator == KSH and inst.source is None:
        raise ValueError("KSH needs an instance mapped from a balanced 2TSP")
    if repetitions < 1:
        raise ValueError("repetitions must be positive")
    children = np.random.SeedSequence(seed).spawn(repetitions)
    t0 = time.perf_counter()
    best: Optional[TwoVrpSolution] = None
    result = HeuristicResult(best=None)  # type: ignore[arg-type]
    for rep in range(repetitions):
        if generator == KSH:
            sol = ks_solution(inst, 1 + rep % (inst.source.n - 1))
        else:
            sol = random_solution(inst, np.random.default_rng(children[rep]))
        if observer:
            observer("generate", sol, sol)
        it = 0
        while True:
            it += 1
            after_h = sliding_subset_search(inst, sol, params)
            if observer:
                observer("sliding", sol, after_h)
            after_b = improve_routes(inst, after_h)
            if observer:
                observer("belperm", after_h, after_b)
            improved = _improves(after_b.cost, sol.cost)
            sol = after_b
            if best is None or sol.cost < best.cost:
                best = sol
            result.log.append(LogRow(instance_id, rep + 1, it, best.cost,
                                     gap_percent(best.cost, optimum),
                                     1000.0 * (time.perf_counter() - t0)))
            if not improved:
                break
        result.repetitions_run = rep + 1
        if stop_at is not None and not _improves(stop_at, best.cost):
            break
    result.best = best
    return result
