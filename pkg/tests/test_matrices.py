import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tworoute.generator import GeneratorParams, generate_kalmanson
from tworoute.matrices import (MatrixError, asymmetric_matrix, check_demidenko, check_kalmanson,
                               check_kalmanson_adjacent, check_permutation, cyclic_shift, inverse,
                               is_anti_robinson, permute, symmetric_matrix, tour_length,
                               zero_transform)

from helpers import random_symmetric


def test_symmetric_matrix_rejects_bad_input():
    with pytest.raises(MatrixError):
        symmetric_matrix([[0, 1], [2, 0]])
    with pytest.raises(MatrixError):
        symmetric_matrix([[0, 1, 2], [1, 0, 3]])
    with pytest.raises(MatrixError):
        symmetric_matrix([[0, np.nan], [np.nan, 0]])


def test_asymmetric_matrix_allows_inf():
    c = asymmetric_matrix([[0, np.inf], [3, 0]])
    assert c[0, 1] == np.inf


def test_permutation_helpers():
    sigma = check_permutation([2, 0, 1])
    assert list(inverse(sigma)) == [1, 2, 0]
    assert list(cyclic_shift(sigma, 1)) == [0, 1, 2]
    with pytest.raises(MatrixError):
        check_permutation([0, 0, 1])
    c = np.arange(9.0).reshape(3, 3)
    assert permute(c, sigma)[0, 1] == c[2, 0]


def test_tour_length_closes_tour():
    c = np.array([[0, 1, 4], [1, 0, 2], [4, 2, 0]], float)
    assert tour_length(c, [0, 1, 2]) == 7.0


def _kalmanson_brute(c):
    n = len(c)
    for i, j, l, m in itertools.combinations(range(n), 4):
        if c[i, j] + c[l, m] > c[i, l] + c[j, m] + 1e-9:
            return False
        if c[i, m] + c[j, l] > c[i, l] + c[j, m] + 1e-9:
            return False
    return True


@settings(max_examples=60, deadline=None)
@given(st.integers(4, 8), st.integers(0, 10**6))
def test_adjacent_check_matches_quadruples(n, seed):
    rng = np.random.default_rng(seed)
    if seed % 2:
        c = generate_kalmanson(GeneratorParams(n, seed=seed, permute_output=False)).matrix
        c = c.copy()
        i, j = sorted(rng.choice(n, 2, replace=False))
        c[i, j] = c[j, i] = c[i, j] * rng.uniform(0.5, 1.5)
    else:
        c = random_symmetric(n, rng)
    expected = _kalmanson_brute(c)
    assert bool(check_kalmanson(c)) == expected
    assert bool(check_kalmanson_adjacent(c)) == expected


def test_generated_matrix_is_strong_kalmanson():
    g = generate_kalmanson(GeneratorParams(12, seed=3))
    assert check_kalmanson(g.kalmanson, strict=True)
    assert not check_kalmanson(g.matrix)  # disguised by the permutation
    assert check_kalmanson(permute(g.matrix, g.hidden_order), strict=True)


def test_kalmanson_witness_is_reported():
    c = generate_kalmanson(GeneratorParams(6, seed=1, permute_output=False)).matrix.copy()
    c[0, 1] = c[1, 0] = 100.0
    res = check_kalmanson(c)
    assert not res and res.witness[:2] == (0, 1) and res.condition == "kalmanson-1"


def test_kalmanson_implies_demidenko():
    c = generate_kalmanson(GeneratorParams(9, seed=5, permute_output=False)).matrix
    assert check_demidenko(c)


def test_zero_transform_gives_anti_robinson_minor():
    c = generate_kalmanson(GeneratorParams(9, seed=2, permute_output=False)).matrix
    z = zero_transform(c)
    assert np.all(z[0] == 0) and np.all(z[:, 0] == 0)
    assert is_anti_robinson(z[1:, 1:])
    c = c.copy()
    c[1, 4] = c[4, 1] = c[1, 4] + 50
    assert not is_anti_robinson(zero_transform(c)[1:, 1:])
