"""Balanced two-period TSP: exact DP on Kalmanson order, low-memory variant,
brute-force oracle and solution checking.

A solution is written as one sequence ``0, increasing part, 0, decreasing
part, 0``: the first tour takes the increasing part, the second tour the
decreasing one, and fixed nodes appear in both. The DP searches exactly
this family, which contains the optimum whenever the matrix is Kalmanson
in its given order.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .matrices import EPS, symmetric_matrix


class InfeasibleError(ValueError):
    """No solution satisfies the balance/capacity constraints."""


class SizeGuardError(ValueError):
    """Instance too large for an exponential routine."""


@dataclass(frozen=True)
class TwoTspInstance:
    matrix: np.ndarray
    fixed: frozenset
    near_balanced: bool = False

    def __post_init__(self):
        object.__setattr__(self, "matrix", symmetric_matrix(self.matrix))
        object.__setattr__(self, "fixed", frozenset(int(x) for x in self.fixed))
        n = self.n
        if n < 3:
            raise ValueError("need at least 3 nodes")
        if 0 not in self.fixed:
            raise ValueError("node 0 must be fixed")
        if not self.fixed <= set(range(n)):
            raise ValueError("fixed nodes out of range")
        if (n + len(self.fixed)) % 2 and not self.near_balanced:
            raise ValueError("n + |S| must be even (set near_balanced for odd totals)")

    @property
    def n(self) -> int:
        return len(self.matrix)

    @property
    def sizes(self) -> tuple[int, int]:
        """Admissible tour sizes (node 0 counted once per tour)."""
        total = self.n + len(self.fixed)
        return total // 2, (total + 1) // 2

    @property
    def p(self) -> int:
        return self.sizes[1]


@dataclass(frozen=True)
class TwoTourSolution:
    """Two closed tours written as sequences that start and end at node 0."""

    tour1: tuple
    tour2: tuple
    total: float

    @classmethod
    def from_tours(cls, c, tour1: Sequence[int], tour2: Sequence[int]) -> "TwoTourSolution":
        t1, t2 = _closed(tour1), _closed(tour2)
        return cls(t1, t2, math.fsum(_edges(c, t1) + _edges(c, t2)))


def _closed(tour) -> tuple:
    t = [int(x) for x in tour]
    if not t or t[0] != 0:
        raise ValueError("tours start at node 0")
    if len(t) == 1 or t[-1] != 0:
        t.append(0)
    return tuple(t)


def _edges(c, seq) -> list:
    return [float(c[a, b]) for a, b in zip(seq, seq[1:])]


def path_cost(c, seq) -> float:
    return math.fsum(_edges(c, seq))


@dataclass
class Evaluation:
    feasible: bool
    total: float
    violations: list = field(default_factory=list)


def evaluate_solution(inst: TwoTspInstance, sol: TwoTourSolution) -> Evaluation:
    """Check a two-tour solution against the instance and recompute its total."""
    c = inst.matrix
    n = inst.n
    violations = []
    tours = [list(sol.tour1), list(sol.tour2)]
    for k, t in enumerate(tours, 1):
        if len(t) < 2 or t[0] != 0 or t[-1] != 0:
            violations.append(f"tour{k} must start and end at node 0")
        inner = t[1:-1]
        if any(not 0 < x < n for x in inner):
            violations.append(f"tour{k} visits an unknown node or node 0 twice")
        if len(set(inner)) != len(inner):
            violations.append(f"tour{k} repeats a node")
    sets = [set(t[1:-1]) | {0} for t in tours]
    if not all(inst.fixed <= s for s in sets):
        violations.append("fixed node absent")
    free = set(range(n)) - inst.fixed
    for x in sorted(free):
        k = (x in sets[0]) + (x in sets[1])
        if k != 1:
            violations.append(f"coverage: node {x} visited {k} times")
    lo, hi = inst.sizes
    sizes = [len(t) - 1 for t in tours]
    if any(not lo <= s <= hi for s in sizes) or sum(sizes) != n + len(inst.fixed):
        violations.append(f"balance: tour sizes {sizes}, expected {lo}/{hi}")
    try:
        total = math.fsum(_edges(c, tours[0]) + _edges(c, tours[1]))
    except IndexError:
        total = math.inf
    if not violations and not math.isclose(total, sol.total, rel_tol=EPS, abs_tol=EPS):
        violations.append(f"total mismatch: reported {sol.total}, recomputed {total}")
    return Evaluation(not violations, total, violations)


# --------------------------------------------------------------------------
# cubic-space DP


def _shift(v):
    # v[..., m+1] aligned to index m; the top level drops out as infeasible
    out = np.empty_like(v)
    out[..., :-1] = v[..., 1:]
    out[..., -1] = np.inf
    return out


def _dp_table(inst: TwoTspInstance) -> np.ndarray:
    c = inst.matrix
    n = inst.n
    lo, hi = inst.sizes
    if len(inst.fixed) > hi:
        raise InfeasibleError(f"{len(inst.fixed)} fixed nodes cannot fit in tours of size {hi}")
    fixed = np.zeros(n, dtype=bool)
    fixed[list(inst.fixed)] = True
    # v[a, b, m]: a = end of first tour, b = start of second tour,
    # m = nodes already in the second tour (node 0 included)
    mlen = hi + 2
    v = np.full((n, n, mlen), np.inf)
    ok = np.zeros(mlen, dtype=bool)
    ok[lo:hi + 1] = True
    last = n - 1
    v[last, :, :] = np.where(ok, (c[last, 0] + c[0, :])[:, None], np.inf)
    v[:, last, :] = np.where(ok, (c[:, 0] + c[0, last])[:, None], np.inf)
    for j in range(n - 2, -1, -1):
        t = j + 1
        r = np.arange(j)
        if fixed[t]:
            both = _shift(v[t, t])
            v[j, r] = (c[j, t] + c[t, r])[:, None] + both[None, :]
            v[r, j] = (c[r, t] + c[t, j])[:, None] + both[None, :]
            v[j, j] = c[j, t] + c[t, j] + both
        else:
            o1 = c[j, t] + v[t, r]
            o2 = c[t, r][:, None] + _shift(v[j, t])[None, :]
            v[j, r] = np.minimum(o1, o2)
            o1 = c[r, t][:, None] + v[t, j][None, :]
            o2 = c[t, j] + _shift(v[r, t])
            v[r, j] = np.minimum(o1, o2)
            v[j, j] = np.minimum(c[j, t] + v[t, j], c[t, j] + _shift(v[j, t]))
    return v


def solve_balanced_2tsp(inst: TwoTspInstance) -> TwoTourSolution:
    """Best solution of the increasing/decreasing sequence family in O(n^3).

    Globally optimal when ``inst.matrix`` is a Kalmanson matrix in its
    given order; a feasible heuristic solution otherwise.
    """
    c = inst.matrix
    n = inst.n
    v = _dp_table(inst)
    if not np.isfinite(v[0, 0, 1]):
        raise InfeasibleError("no balanced solution exists")
    up, down = [], []
    a = b = 0
    m = 1
    for t in range(1, n):
        if t in inst.fixed:
            up.append(t)
            down.append(t)
            a = b = t
            m += 1
            continue
        o1 = c[a, t] + v[t, b, m]
        o2 = c[t, b] + (v[a, t, m + 1] if m + 1 < v.shape[2] else np.inf)
        if o1 <= o2:
            up.append(t)
            a = t
        else:
            down.append(t)
            b = t
            m += 1
    return TwoTourSolution.from_tours(c, [0, *up, 0], [0, *reversed(down), 0])


# --------------------------------------------------------------------------
# quadratic-space variant


def solve_balanced_2tsp_lowmem(inst: TwoTspInstance, reconstruct: bool = False):
    """Same optimum as :func:`solve_balanced_2tsp` using O(n^2) memory.

    Keeps only the current level of the recursion: ``mv[i, m]`` (first tour
    ends at ``i``, second starts at the current node ``j``), ``mw[i, m]``
    (the reverse) and ``d[m]`` (both at ``j``). Returns the optimal value;
    with ``reconstruct=True`` the tours are recovered by the cubic solver.
    """
    c = inst.matrix
    n = inst.n
    lo, hi = inst.sizes
    if len(inst.fixed) > hi:
        raise InfeasibleError(f"{len(inst.fixed)} fixed nodes cannot fit in tours of size {hi}")
    fixed = np.zeros(n, dtype=bool)
    fixed[list(inst.fixed)] = True
    mlen = hi + 2
    ok = np.zeros(mlen, dtype=bool)
    ok[lo:hi + 1] = True
    last = n - 1
    mv = np.where(ok, (c[:, 0] + c[0, last])[:, None], np.inf)
    mw = np.where(ok, (c[last, 0] + c[0, :])[:, None], np.inf)
    d = np.where(ok, c[last, 0] + c[0, last], np.inf)
    for j in range(n - 2, 0, -1):
        t = j + 1
        r = np.arange(j)
        if fixed[t]:
            both = _shift(d)
            new_mv = (c[r, t] + c[t, j])[:, None] + both[None, :]
            new_mw = (c[j, t] + c[t, r])[:, None] + both[None, :]
            new_d = c[j, t] + c[t, j] + both
        else:
            new_mv = np.minimum(c[r, t][:, None] + mw[j][None, :], c[t, j] + _shift(mv[r]))
            new_mw = np.minimum(c[j, t] + mw[r], c[t, r][:, None] + _shift(mv[j])[None, :])
            new_d = np.minimum(c[j, t] + mw[j], c[t, j] + _shift(mv[j]))
        mv[r] = new_mv
        mw[r] = new_mw
        d = new_d
    if fixed[1]:
        value = c[0, 1] + c[1, 0] + _shift(d)[1]
    else:
        value = min(c[0, 1] + mw[0, 1], c[1, 0] + _shift(mv[0])[1])
    if not np.isfinite(value):
        raise InfeasibleError("no balanced solution exists")
    if reconstruct:
        return solve_balanced_2tsp(inst)
    return float(value)


# --------------------------------------------------------------------------
# brute force

ORACLE_LIMIT = 18


def _best_tour(c, nodes: tuple, cache: dict):
    if nodes in cache:
        return cache[nodes]
    best, best_t = math.inf, None
    for perm in itertools.permutations(nodes):
        t = (0, *perm, 0)
        length = path_cost(c, t)
        if length < best:
            best, best_t = length, t
    if not nodes:
        best, best_t = 0.0, (0, 0)
    cache[nodes] = (best, best_t)
    return best, best_t


def oracle_2tsp(inst: TwoTspInstance) -> TwoTourSolution:
    """Exhaustive search over all balanced splits and all tour orders."""
    n = inst.n
    if n + len(inst.fixed) > ORACLE_LIMIT:
        raise SizeGuardError(f"oracle limited to n + |S| <= {ORACLE_LIMIT}")
    c = inst.matrix
    fixed = sorted(inst.fixed - {0})
    free = [x for x in range(1, n) if x not in inst.fixed]
    lo, hi = inst.sizes
    cache: dict = {}
    best, best_pair = math.inf, None
    for size1 in sorted({lo, hi}):
        extra = size1 - 1 - len(fixed)
        if not 0 <= extra <= len(free) or len(free) - extra + 1 + len(fixed) not in (lo, hi):
            continue
        for part in itertools.combinations(free, extra):
            rest = tuple(x for x in free if x not in part)
            l1, t1 = _best_tour(c, tuple(sorted(fixed + list(part))), cache)
            l2, t2 = _best_tour(c, tuple(sorted(fixed + list(rest))), cache)
            total = math.fsum(_edges(c, t1) + _edges(c, t2))
            if total < best:
                best, best_pair = total, (t1, t2)
    if best_pair is None:
        raise InfeasibleError("no balanced solution exists")
    return TwoTourSolution(best_pair[0], best_pair[1], best)
