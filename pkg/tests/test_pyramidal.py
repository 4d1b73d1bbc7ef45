import itertools

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from tworoute.matrices import tour_length
from tworoute.pyramidal import belperm, optimal_pyramidal

from helpers import random_symmetric


def pyramidal_tours(n):
    middle = range(1, n - 1)
    for k in range(len(middle) + 1):
        for up in itertools.combinations(middle, k):
            down = sorted(set(middle) - set(up), reverse=True)
            yield [0, *up, n - 1, *down]


def two_opt_gain(c, tour):
    n = len(tour)
    best = 0.0
    for i in range(n - 1):
        for j in range(i + 2, n):
            a, b = tour[i], tour[i + 1]
            x, y = tour[j], tour[(j + 1) % n]
            if a == y:
                continue
            best = max(best, c[a, b] + c[x, y] - c[a, x] - c[b, y])
    return best


@settings(max_examples=100, deadline=None)
@given(st.integers(3, 10), st.integers(0, 10**6), st.booleans())
def test_pyramidal_dp_matches_enumeration(n, seed, asym):
    rng = np.random.default_rng(seed)
    c = rng.integers(1, 50, (n, n)).astype(float) if asym else random_symmetric(n, rng)
    np.fill_diagonal(c, 0)
    best = min(tour_length(c, t) for t in pyramidal_tours(n))
    tour = optimal_pyramidal(c)
    assert tour.length == best
    assert sorted(tour.nodes) == list(range(n))


@settings(max_examples=50, deadline=None)
@given(st.integers(4, 10), st.integers(0, 10**6))
def test_belperm_is_two_opt_local_optimum(n, seed):
    c = random_symmetric(n, np.random.default_rng(seed))
    tour = belperm(c)
    assert tour.nodes[0] == 0 and sorted(tour.nodes) == list(range(n))
    assert tour.length == tour_length(c, tour.nodes)
    assert two_opt_gain(c, list(tour.nodes)) <= 1e-9 * max(1.0, tour.length)


def test_belperm_never_worse_than_start():
    rng = np.random.default_rng(1)
    c = random_symmetric(9, rng)
    start = rng.permutation(9)
    assert belperm(c, start).length <= tour_length(c, start)


def test_pyramidal_handles_inf():
    c = np.full((4, 4), np.inf)
    np.fill_diagonal(c, 0)
    for a, b in [(0, 1), (1, 3), (3, 2), (2, 0)]:
        c[a, b] = 1.0
    tour = optimal_pyramidal(c)
    assert tour.nodes == (0, 1, 3, 2) and tour.length == 4.0
