"""Optimal pyramidal tours and the BELPERM local search built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numba
import numpy as np

from .matrices import EPS, check_permutation, cyclic_shift, tour_length


@dataclass(frozen=True)
class Tour:
    """Closed tour starting at node 0; the edge back to 0 is implicit."""

    nodes: tuple
    length: float


@numba.njit(cache=True)
def _pyramidal_table(c):
    # e[a, b]: cheapest path a -> (up through max(a,b)+1..n-1, then down) -> b
    n = c.shape[0]
    e = np.full((n, n), np.inf)
    last = n - 1
    for a in range(n):
        e[a, last] = c[a, last]
        e[last, a] = c[last, a]
    for j in range(n - 2, 0, -1):
        t = j + 1
        for b in range(j):
            # state (j, b) then (b, j)
            o1 = c[j, t] + e[t, b]
            o2 = e[j, t] + c[t, b]
            e[j, b] = o1 if o1 <= o2 else o2
            o1 = c[b, t] + e[t, j]
            o2 = e[b, t] + c[t, j]
            e[b, j] = o1 if o1 <= o2 else o2
    return e


@numba.njit(cache=True)
def _pyramidal_tour(c):
    n = c.shape[0]
    order = np.empty(n, dtype=np.int64)
    order[0] = 0
    if n == 1:
        return 0.0, order
    if n == 2:
        order[1] = 1
        return c[0, 1] + c[1, 0], order
    e = _pyramidal_table(c)
    o1 = c[0, 1] + e[1, 0]
    o2 = c[1, 0] + e[0, 1]
    up = np.empty(n, dtype=np.int64)
    down = np.empty(n, dtype=np.int64)
    nu = 0
    nd = 0
    if o1 <= o2:
        best = o1
        a, b = 1, 0
        up[nu] = 1
        nu += 1
    else:
        best = o2
        a, b = 0, 1
        down[nd] = 1
        nd += 1
    while max(a, b) < n - 1:
        t = max(a, b) + 1
        if t == n - 1:
            up[nu] = t
            nu += 1
            break
        if c[a, t] + e[t, b] <= e[a, t] + c[t, b]:
            up[nu] = t
            nu += 1
            a = t
        else:
            down[nd] = t
            nd += 1
            b = t
    k = 1
    for x in range(nu):
        order[k] = up[x]
        k += 1
    for x in range(nd - 1, -1, -1):
        order[k] = down[x]
        k += 1
    return best, order


def optimal_pyramidal(c: np.ndarray) -> Tour:
    """Shortest pyramidal tour ``0 -> increasing -> n-1 -> decreasing -> 0``.

    Works on asymmetric matrices (``inf`` entries allowed) in O(n^2).
    Ties are broken towards attaching the next city on the ascending side.
    """
    c = np.ascontiguousarray(c, dtype=float)
    _, order = _pyramidal_tour(c)
    nodes = tuple(int(x) for x in order)
    return Tour(nodes, tour_length(c, nodes))


def belperm(c: np.ndarray, sigma0: Optional[Sequence[int]] = None) -> Tour:
    """Iterated pyramidal search over all cyclic shifts of a numbering.

    Each sweep solves the pyramidal problem for every cyclic shift of the
    current permutation and keeps the best tour; the sweep restarts from
    that tour while it strictly improves (by more than a relative ``EPS``).
    """
    c = np.ascontiguousarray(c, dtype=float)
    n = len(c)
    sigma = check_permutation(np.arange(n) if sigma0 is None else sigma0, n)
    best_nodes = sigma
    best_len = tour_length(c, sigma)
    while True:
        sweep_nodes, sweep_len = None, math.inf
        for k in range(n):
            s = cyclic_shift(sigma, k)
            length, order = _pyramidal_tour(c[np.ix_(s, s)])
            if length < sweep_len:
                sweep_len, sweep_nodes = length, s[order]
        sweep_len = tour_length(c, sweep_nodes)
        if sweep_len < best_len - EPS * max(1.0, abs(best_len)):
            best_len, best_nodes = sweep_len, sweep_nodes
            sigma = sweep_nodes
        else:
            break
    return Tour(_rotate_to_zero(best_nodes), best_len)


def _rotate_to_zero(nodes) -> tuple:
    nodes = [int(x) for x in nodes]
    k = nodes.index(0)
    return tuple(nodes[k:] + nodes[:k])
