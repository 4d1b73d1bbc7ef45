"""Two-vehicle routing with interval customers: model, exact subset DP and oracle.

A customer is an interval with a left and a right node. Entering at the
left node means traversing it left to right (cost ``l*_left``) and
leaving from the right node; entering at the right node is the reverse
(cost ``l*_right``). Vehicle 1 drives from ``d1_start`` to ``d1_end``,
vehicle 2 from ``d2_start`` to ``d2_end``, each with its own cost matrix.

The exact solver treats both routes as one sequence split by an auxiliary
customer 0 whose left node is ``d1_end`` and whose right node is
``d2_start``: customers before it use vehicle-1 costs, customers after it
use vehicle-2 costs.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numba
import numpy as np

from .matrices import EPS, asymmetric_matrix
from .two_tsp import InfeasibleError, SizeGuardError, TwoTourSolution, TwoTspInstance

FREE, VEHICLE1, VEHICLE2 = 0, 1, 2
LEFT, RIGHT = "L", "R"

#: Default limit on the number of subset bits (customers plus the auxiliary one).
DEFAULT_MAX_SUBSET_BITS = 24
ORACLE_LIMIT = 9


def max_subset_bits() -> int:
    return int(os.environ.get("TWOROUTE_MAX_SUBSET_BITS", DEFAULT_MAX_SUBSET_BITS))


def capacity_ok(load: float, cap: float) -> bool:
    return load <= cap + EPS * max(1.0, abs(cap))


@dataclass(frozen=True)
class Customer:
    left: int
    right: int
    l1_left: float = 0.0
    l1_right: float = 0.0
    l2_left: float = 0.0
    l2_right: float = 0.0
    demand: float = 0.0
    fixed_to: int = FREE

    def __post_init__(self):
        for name in ("l1_left", "l1_right", "l2_left", "l2_right"):
            v = float(getattr(self, name))
            if math.isnan(v) or v < 0:
                raise ValueError(f"{name} must be nonnegative or inf")
            object.__setattr__(self, name, v)
        if not self.demand >= 0 or math.isinf(self.demand):
            raise ValueError("demand must be finite and nonnegative")
        if self.fixed_to not in (FREE, VEHICLE1, VEHICLE2):
            raise ValueError("fixed_to must be 0 (free), 1 or 2")
        object.__setattr__(self, "left", int(self.left))
        object.__setattr__(self, "right", int(self.right))
        object.__setattr__(self, "demand", float(self.demand))

    def entry(self, d: str) -> int:
        return self.left if d == LEFT else self.right

    def exit(self, d: str) -> int:
        return self.right if d == LEFT else self.left

    def internal(self, d: str, vehicle: int) -> float:
        if vehicle == 1:
            return self.l1_left if d == LEFT else self.l1_right
        return self.l2_left if d == LEFT else self.l2_right


@dataclass(frozen=True)
class TwoVrpInstance:
    """Customers are numbered 1..n in the order of ``customers``."""

    customers: tuple
    d1_start: int
    d1_end: int
    d2_start: int
    d2_end: int
    cap1: float
    cap2: float
    c1: np.ndarray = field(repr=False)
    c2: np.ndarray = field(repr=False)
    allow_empty_vehicle1: bool = False
    source: Optional[TwoTspInstance] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "customers", tuple(self.customers))
        c1 = asymmetric_matrix(self.c1)
        c2 = asymmetric_matrix(self.c2)
        if c1.shape != c2.shape:
            raise ValueError("both cost matrices must have the same size")
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "c2", c2)
        size = len(c1)
        nodes = [self.d1_start, self.d1_end, self.d2_start, self.d2_end]
        for cu in self.customers:
            nodes += [cu.left, cu.right]
        if any(not 0 <= x < size for x in nodes):
            raise ValueError("node label outside the cost matrices")
        if self.cap1 < 0 or self.cap2 < 0:
            raise ValueError("capacities must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.customers)

    def customer(self, cid: int) -> Customer:
        return self.customers[cid - 1]

    def matrix(self, vehicle: int) -> np.ndarray:
        return self.c1 if vehicle == 1 else self.c2


@dataclass(frozen=True)
class TwoVrpSolution:
    """Routes are tuples of ``(customer_id, "L" | "R")``, ids 1-based."""

    route1: tuple
    route2: tuple
    cost: float
    loads: tuple = (0.0, 0.0)


def route_terms(inst: TwoVrpInstance, route: Sequence, vehicle: int) -> list:
    """Arc and traversal costs of one vehicle's route, in driving order."""
    c = inst.matrix(vehicle)
    start, end = (inst.d1_start, inst.d1_end) if vehicle == 1 else (inst.d2_start, inst.d2_end)
    terms = []
    at = start
    for cid, d in route:
        cu = inst.customer(cid)
        terms += [float(c[at, cu.entry(d)]), cu.internal(d, vehicle)]
        at = cu.exit(d)
    terms.append(float(c[at, end]))
    return terms


def route_cost(inst: TwoVrpInstance, route: Sequence, vehicle: int) -> float:
    return math.fsum(route_terms(inst, route, vehicle))


def solution_cost(inst: TwoVrpInstance, route1, route2) -> float:
    return math.fsum(route_terms(inst, route1, 1) + route_terms(inst, route2, 2))


def make_solution(inst: TwoVrpInstance, route1, route2) -> TwoVrpSolution:
    route1 = tuple((int(c), str(d)) for c, d in route1)
    route2 = tuple((int(c), str(d)) for c, d in route2)
    cost = solution_cost(inst, route1, route2)
    loads = (math.fsum(inst.customer(c).demand for c, _ in route1),
             math.fsum(inst.customer(c).demand for c, _ in route2))
    return TwoVrpSolution(route1, route2, cost, loads)


@dataclass
class VrpEvaluation:
    feasible: bool
    cost: float
    violations: list = field(default_factory=list)


def evaluate_2vrp(inst: TwoVrpInstance, sol: TwoVrpSolution) -> VrpEvaluation:
    violations = []
    seen: dict = {}
    for k, route in ((1, sol.route1), (2, sol.route2)):
        for cid, d in route:
            if not 1 <= cid <= inst.n or d not in (LEFT, RIGHT):
                violations.append(f"route{k}: invalid entry ({cid}, {d})")
                continue
            seen.setdefault(cid, []).append(k)
    if violations:
        return VrpEvaluation(False, math.inf, violations)
    for cid in range(1, inst.n + 1):
        visits = seen.get(cid, [])
        if len(visits) != 1:
            violations.append(f"coverage: customer {cid} visited {len(visits)} times")
            continue
        fixed = inst.customer(cid).fixed_to
        if fixed != FREE and visits[0] != fixed:
            violations.append(f"fixed_to: customer {cid} belongs to vehicle {fixed}")
    loads = [math.fsum(inst.customer(c).demand for c, _ in r) for r in (sol.route1, sol.route2)]
    for k, (load, cap) in enumerate(zip(loads, (inst.cap1, inst.cap2)), 1):
        if not capacity_ok(load, cap):
            violations.append(f"capacity-{k}: load {load} exceeds {cap}")
    if not sol.route1 and not inst.allow_empty_vehicle1:
        violations.append("empty vehicle 1")
    cost = solution_cost(inst, sol.route1, sol.route2)
    if not math.isfinite(cost):
        violations.append("infinite cost")
    elif not math.isclose(cost, sol.cost, rel_tol=EPS, abs_tol=EPS):
        violations.append(f"cost mismatch: reported {sol.cost}, recomputed {cost}")
    return VrpEvaluation(not violations, cost, violations)


# --------------------------------------------------------------------------
# exact subset DP


@numba.njit(cache=True)
def _subset_dp(lnode, rnode, l1l, l1r, l2l, l2r, w, fixed, c1, c2,
               d1s, d2e, cap1, cap2, tol1, tol2, allow_empty):
    # index 0 is the auxiliary customer; bit k of a mask is customer k
    m = lnode.shape[0]
    full = (1 << m) - 1
    wsum = np.zeros(1 << m)
    for mask in range(1, 1 << m):
        low = mask & (-mask)
        k = 0
        while (1 << k) != low:
            k += 1
        wsum[mask] = wsum[mask ^ low] + w[k]
    total = wsum[full]
    vl = np.full((m, 1 << m), np.inf)
    vr = np.full((m, 1 << m), np.inf)
    v1mask = 0
    v2mask = 0
    for k in range(m):
        if fixed[k] == 1:
            v1mask |= 1 << k
        elif fixed[k] == 2:
            v2mask |= 1 << k
    js = np.empty(m, dtype=np.int64)
    ja = np.empty(m)
    jb = np.empty(m)
    for mask in range(0, 1 << m):
        wj = wsum[mask]
        # masks no optimal route can produce: vehicle 2 holding a vehicle-1
        # customer, or vehicle 1 having visited a vehicle-2 customer
        if mask & 1 == 0:
            if mask & v1mask:
                continue
        elif (full ^ mask) & v2mask:
            continue
        # successors (j, rest of mask) with a finite continuation
        cnt = 0
        for j in range(m):
            if mask & (1 << j):
                sub = mask ^ (1 << j)
                if vl[j, sub] < np.inf or vr[j, sub] < np.inf:
                    js[cnt] = j
                    ja[cnt] = vl[j, sub]
                    jb[cnt] = vr[j, sub]
                    cnt += 1
        if mask != 0 and cnt == 0:
            continue
        if mask & 1 == 0 and total - wj <= cap1 + tol1 and wj <= cap2 + tol2:
            # customer 0: vehicle 1 ends, vehicle 2 starts
            if mask == 0:
                vl[0, 0] = c2[rnode[0], d2e]
            else:
                best = np.inf
                for k in range(cnt):
                    j = js[k]
                    v = c2[rnode[0], lnode[j]] + ja[k]
                    if v < best:
                        best = v
                    v = c2[rnode[0], rnode[j]] + jb[k]
                    if v < best:
                        best = v
                vl[0, mask] = best
        if mask & 1:
            # vehicle 1 still driving: i and everything outside mask is on it
            if total - wj > cap1 + tol1:
                continue
            c = c1
            veh = 1
        else:
            if wj > cap2 + tol2:
                continue
            c = c2
            veh = 2
        for i in range(1, m):
            if mask & (1 << i):
                continue
            if veh == 1:
                if fixed[i] == 2:
                    continue
                al = l1l[i]
                ar = l1r[i]
            else:
                if fixed[i] == 1 or wj + w[i] > cap2 + tol2:
                    continue
                al = l2l[i]
                ar = l2r[i]
            if mask == 0:
                vl[i, 0] = al + c2[rnode[i], d2e]
                vr[i, 0] = ar + c2[lnode[i], d2e]
                continue
            ri = rnode[i]
            li = lnode[i]
            bl = np.inf
            br = np.inf
            for k in range(cnt):
                lj = lnode[js[k]]
                rj = rnode[js[k]]
                v = c[ri, lj] + ja[k]
                if v < bl:
                    bl = v
                v = c[ri, rj] + jb[k]
                if v < bl:
                    bl = v
                v = c[li, lj] + ja[k]
                if v < br:
                    br = v
                v = c[li, rj] + jb[k]
                if v < br:
                    br = v
            vl[i, mask] = al + bl
            vr[i, mask] = ar + br

    # assemble and backtrack; ties go to the smallest customer, left before right
    best = np.inf
    bi = -1
    bd = 0
    first = 0 if allow_empty else 1
    for i in range(first, m):
        rest = full ^ (1 << i)
        v = c1[d1s, lnode[i]] + vl[i, rest]
        if v < best:
            best, bi, bd = v, i, 0
        if i > 0:
            v = c1[d1s, rnode[i]] + vr[i, rest]
            if v < best:
                best, bi, bd = v, i, 1
    seq = np.empty(m, dtype=np.int64)
    dirs = np.empty(m, dtype=np.int64)
    if bi < 0 or not np.isfinite(best):
        return np.inf, seq[:0], dirs[:0]
    mask = full ^ (1 << bi)
    i, d = bi, bd
    seq[0] = i
    dirs[0] = d
    for step in range(1, m):
        target = vl[i, mask] if d == 0 else vr[i, mask]
        vehicle1 = i != 0 and (mask & 1) != 0
        c = c1 if vehicle1 else c2
        if i == 0:
            base = 0.0
            out = rnode[0]
        elif vehicle1:
            base = l1l[i] if d == 0 else l1r[i]
            out = rnode[i] if d == 0 else lnode[i]
        else:
            base = l2l[i] if d == 0 else l2r[i]
            out = rnode[i] if d == 0 else lnode[i]
        found = False
        for j in range(m):
            if mask & (1 << j):
                sub = mask ^ (1 << j)
                if base + (c[out, lnode[j]] + vl[j, sub]) == target:
                    nd = 0
                    found = True
                elif base + (c[out, rnode[j]] + vr[j, sub]) == target:
                    nd = 1
                    found = True
                if found:
                    i, d, mask = j, nd, sub
                    break
        seq[step] = i
        dirs[step] = d
    return best, seq, dirs


@dataclass
class _Arrays:
    lnode: np.ndarray
    rnode: np.ndarray
    l1l: np.ndarray
    l1r: np.ndarray
    l2l: np.ndarray
    l2r: np.ndarray
    w: np.ndarray
    fixed: np.ndarray


def _instance_arrays(inst: TwoVrpInstance) -> _Arrays:
    cs = inst.customers
    inf = np.inf
    return _Arrays(
        np.array([inst.d1_end] + [c.left for c in cs], dtype=np.int64),
        np.array([inst.d2_start] + [c.right for c in cs], dtype=np.int64),
        np.array([0.0] + [c.l1_left for c in cs]),
        np.array([inf] + [c.l1_right for c in cs]),
        np.array([0.0] + [c.l2_left for c in cs]),
        np.array([inf] + [c.l2_right for c in cs]),
        np.array([0.0] + [c.demand for c in cs]),
        np.array([FREE] + [c.fixed_to for c in cs], dtype=np.int64),
    )


def run_subset_dp(a: _Arrays, c1, c2, d1s, d2e, cap1, cap2, allow_empty):
    """Solve on raw arrays; returns ``(value, route1, route2)`` with 1-based items."""
    bits = len(a.lnode)
    if bits > max_subset_bits():
        raise SizeGuardError(f"{bits} subset bits exceed the limit of {max_subset_bits()} "
                             "(set TWOROUTE_MAX_SUBSET_BITS to raise it)")
    tol1 = EPS * max(1.0, abs(cap1))
    tol2 = EPS * max(1.0, abs(cap2))
    value, seq, dirs = _subset_dp(a.lnode, a.rnode, a.l1l, a.l1r, a.l2l, a.l2r, a.w, a.fixed,
                                  c1, c2, int(d1s), int(d2e), float(cap1), float(cap2),
                                  tol1, tol2, bool(allow_empty))
    if not np.isfinite(value):
        raise InfeasibleError("no feasible two-vehicle route")
    steps = [(int(i), LEFT if d == 0 else RIGHT) for i, d in zip(seq, dirs)]
    k = [i for i, _ in steps].index(0)
    return float(value), steps[:k], steps[k + 1:]


def _check_fixed_loads(inst: TwoVrpInstance):
    for v, cap in ((1, inst.cap1), (2, inst.cap2)):
        load = math.fsum(c.demand for c in inst.customers if c.fixed_to == v)
        if not capacity_ok(load, cap):
            raise InfeasibleError(f"customers fixed to vehicle {v} exceed its capacity")


def solve_2vrp_exact(inst: TwoVrpInstance) -> TwoVrpSolution:
    """Exact optimum by dynamic programming over customer subsets.

    Time ``O(n^2 2^n)``, memory ``2 (n+1) 2^(n+1)`` values; guarded by
    :func:`max_subset_bits`.
    """
    _check_fixed_loads(inst)
    a = _instance_arrays(inst)
    _, r1, r2 = run_subset_dp(a, np.ascontiguousarray(inst.c1), np.ascontiguousarray(inst.c2),
                              inst.d1_start, inst.d2_end, inst.cap1, inst.cap2,
                              inst.allow_empty_vehicle1)
    return make_solution(inst, r1, r2)


# --------------------------------------------------------------------------
# brute force


def _best_route(inst: TwoVrpInstance, ids: tuple, vehicle: int):
    """Cheapest order and directions for one vehicle over ``ids``."""
    c = inst.matrix(vehicle)
    start, end = (inst.d1_start, inst.d1_end) if vehicle == 1 else (inst.d2_start, inst.d2_end)
    if not ids:
        return float(c[start, end]), ()
    best, best_route = math.inf, None
    for perm in itertools.permutations(ids):
        # chain over the two possible entry sides of each customer
        costs = {}
        for d in (LEFT, RIGHT):
            cu = inst.customer(perm[0])
            costs[d] = (float(c[start, cu.entry(d)]) + cu.internal(d, vehicle), (d,))
        for prev_id, cid in zip(perm, perm[1:]):
            prev, cu = inst.customer(prev_id), inst.customer(cid)
            nxt = {}
            for d in (LEFT, RIGHT):
                opts = []
                for pd, (pc, path) in costs.items():
                    opts.append((pc + float(c[prev.exit(pd), cu.entry(d)]) + cu.internal(d, vehicle),
                                 path + (d,)))
                nxt[d] = min(opts, key=lambda t: t[0])
            costs = nxt
        last = inst.customer(perm[-1])
        for d, (pc, path) in costs.items():
            total = pc + float(c[last.exit(d), end])
            if total < best:
                best, best_route = total, tuple(zip(perm, path))
    return best, best_route


def oracle_2vrp(inst: TwoVrpInstance) -> TwoVrpSolution:
    """Enumerate assignments, orders and directions (n <= 9)."""
    n = inst.n
    if n > ORACLE_LIMIT:
        raise SizeGuardError(f"oracle limited to {ORACLE_LIMIT} customers")
    cache: dict = {}

    def best(ids, vehicle):
        key = (ids, vehicle)
        if key not in cache:
            cache[key] = _best_route(inst, ids, vehicle)
        return cache[key]

    top, top_pair = math.inf, None
    for assign in itertools.product((1, 2), repeat=n):
        if any(inst.customer(k + 1).fixed_to not in (FREE, v) for k, v in enumerate(assign)):
            continue
        ids1 = tuple(k + 1 for k, v in enumerate(assign) if v == 1)
        ids2 = tuple(k + 1 for k, v in enumerate(assign) if v == 2)
        if not ids1 and not inst.allow_empty_vehicle1:
            continue
        w1 = math.fsum(inst.customer(k).demand for k in ids1)
        w2 = math.fsum(inst.customer(k).demand for k in ids2)
        if not (capacity_ok(w1, inst.cap1) and capacity_ok(w2, inst.cap2)):
            continue
        v1, r1 = best(ids1, 1)
        v2, r2 = best(ids2, 2)
        if r1 is None or r2 is None:
            continue
        if v1 + v2 < top:
            top, top_pair = v1 + v2, (r1, r2)
    if top_pair is None or not math.isfinite(top):
        raise InfeasibleError("no feasible two-vehicle route")
    return make_solution(inst, *top_pair)


# --------------------------------------------------------------------------
# balanced 2TSP as a 2VRP


def map_2tsp_to_2vrp(inst: TwoTspInstance) -> TwoVrpInstance:
    """Node 0 becomes every depot; each other fixed node is split into one
    customer per vehicle; unit demands and capacities ``p - 1`` enforce the
    balance."""
    c = inst.matrix
    customers = []
    for v in range(1, inst.n):
        if v in inst.fixed:
            customers.append(Customer(v, v, demand=1.0, fixed_to=VEHICLE1))
            customers.append(Customer(v, v, demand=1.0, fixed_to=VEHICLE2))
        else:
            customers.append(Customer(v, v, demand=1.0))
    cap = float(inst.p - 1)
    return TwoVrpInstance(tuple(customers), 0, 0, 0, 0, cap, cap, c, c, source=inst)


def vrp_to_tours(vinst: TwoVrpInstance, sol: TwoVrpSolution) -> TwoTourSolution:
    t1 = [0] + [vinst.customer(cid).left for cid, _ in sol.route1] + [0]
    t2 = [0] + [vinst.customer(cid).left for cid, _ in sol.route2] + [0]
    return TwoTourSolution.from_tours(vinst.c1, t1, t2)


def tours_to_vrp(vinst: TwoVrpInstance, tours: TwoTourSolution) -> TwoVrpSolution:
    """Inverse of :func:`vrp_to_tours` for an instance built by :func:`map_2tsp_to_2vrp`."""
    lookup = {}
    for cid, cu in enumerate(vinst.customers, 1):
        for v in ((1, 2) if cu.fixed_to == FREE else (cu.fixed_to,)):
            lookup[(cu.left, v)] = cid
    r1 = [(lookup[(x, 1)], LEFT) for x in tours.tour1[1:-1]]
    r2 = [(lookup[(x, 2)], LEFT) for x in tours.tour2[1:-1]]
    return make_solution(vinst, r1, r2)
