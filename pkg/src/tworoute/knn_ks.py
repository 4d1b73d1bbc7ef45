"""Kalmanson nearest-neighbour ordering and the KS heuristic for the balanced 2TSP."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matrices import cyclic_shift, permute, symmetric_matrix
from .pyramidal import belperm
from .two_tsp import TwoTourSolution, TwoTspInstance, evaluate_solution, solve_balanced_2tsp


@dataclass(frozen=True)
class KnnResult:
    tour: tuple  # cyclic order of all nodes, rotated to start at node 0
    used_start: int


def knn(c: np.ndarray, start: int) -> KnnResult:
    """Grow a path from ``start`` over nodes 1..n-1, then insert node 0.

    Distances for the path are taken in the matrix with row and column 0
    subtracted; the insertion of node 0 uses the original costs. For a
    permuted strong Kalmanson matrix the result permutes it into a
    Kalmanson matrix.

    Ties: the smallest node wins among equally near nodes, and a node
    equally near to both ends is attached at the last end.
    """
    c = symmetric_matrix(c)
    n = len(c)
    if n < 3:
        raise ValueError("need at least 3 nodes")
    if not 1 <= start < n:
        raise ValueError(f"start must lie in 1..{n - 1}")
    cz = c - c[:, :1] - c[:1, :]
    path = [start]
    first = last = start
    left = np.ones(n, dtype=bool)
    left[0] = left[start] = False
    for _ in range(n - 2):
        rem = np.flatnonzero(left)
        df = cz[first, rem]
        dl = cz[last, rem]
        d = np.minimum(df, dl)
        k = int(np.argmin(d))
        x = int(rem[k])
        if df[k] < dl[k]:
            path.insert(0, x)
            first = x
        else:
            path.append(x)
            last = x
        left[x] = False
    # cheapest place for node 0 between consecutive path nodes (cyclically)
    best, pos = math.inf, 0
    for k in range(len(path)):
        x, y = path[k], path[(k + 1) % len(path)]
        inc = c[x, 0] + c[0, y] - c[x, y]
        if inc < best:
            best, pos = inc, k + 1
    tour = [0] + path[pos:] + path[:pos]
    return KnnResult(tuple(tour), start)


def _relabel(inst: TwoTspInstance, tau) -> TwoTspInstance:
    pos = np.empty(len(tau), dtype=np.int64)
    pos[np.asarray(tau)] = np.arange(len(tau))
    return TwoTspInstance(permute(inst.matrix, tau),
                          frozenset(int(pos[s]) for s in inst.fixed),
                          near_balanced=inst.near_balanced)


def _improve_tour(c: np.ndarray, tour: tuple) -> tuple:
    nodes = list(tour[:-1])
    if len(nodes) < 4:
        return tour
    sub = c[np.ix_(nodes, nodes)]
    improved = belperm(sub)
    return (*[nodes[k] for k in improved.nodes], 0)


def ks_start(inst: TwoTspInstance, start: int) -> TwoTourSolution:
    """The KS solution obtained from one start node."""
    c = inst.matrix
    tau = np.asarray(knn(c, start).tour)
    tau = cyclic_shift(tau, int(np.flatnonzero(tau == 0)[0]))
    sol = solve_balanced_2tsp(_relabel(inst, tau))
    t1 = tuple(int(tau[x]) for x in sol.tour1)
    t2 = tuple(int(tau[x]) for x in sol.tour2)
    base = TwoTourSolution.from_tours(c, t1, t2)
    better = TwoTourSolution.from_tours(c, _improve_tour(c, t1), _improve_tour(c, t2))
    if better.total < base.total and evaluate_solution(inst, better).feasible:
        return better
    return base


def ks_heuristic(inst: TwoTspInstance) -> TwoTourSolution:
    """Best KS solution over all start nodes 1..n-1 (first one wins ties)."""
    best = None
    for start in range(1, inst.n):
        sol = ks_start(inst, start)
        if best is None or sol.total < best.total:
            best = sol
    return best
