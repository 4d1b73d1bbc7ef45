import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tworoute.two_tsp import (SizeGuardError, TwoTourSolution, TwoTspInstance,
                              evaluate_solution, oracle_2tsp, solve_balanced_2tsp,
                              solve_balanced_2tsp_lowmem)

from helpers import (balanced_count, fixed_set, integer_kalmanson, kalmanson_2tsp, ordered_2tsp,
                     random_symmetric)


def test_instance_validation():
    c = random_symmetric(5, np.random.default_rng(0))
    with pytest.raises(ValueError):
        TwoTspInstance(c, {1, 2, 3})  # node 0 missing
    with pytest.raises(ValueError):
        TwoTspInstance(c, {0, 1})  # odd total
    inst = TwoTspInstance(c, {0, 1}, near_balanced=True)
    assert inst.sizes == (3, 4)


def test_three_nodes():
    c = np.array([[0, 1, 2], [1, 0, 3], [2, 3, 0]], float)
    inst = TwoTspInstance(c, {0})
    sol = solve_balanced_2tsp(inst)
    assert sol.total == 6.0
    assert evaluate_solution(inst, sol).feasible


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_dp_optimal_on_kalmanson_order(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 10))
    inst = TwoTspInstance(integer_kalmanson(n, rng), fixed_set(n, balanced_count(n, rng), rng))
    sol = solve_balanced_2tsp(inst)
    assert evaluate_solution(inst, sol).feasible
    assert sol.total == oracle_2tsp(inst).total


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_dp_feasible_upper_bound_on_arbitrary(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 10))
    inst = TwoTspInstance(random_symmetric(n, rng), fixed_set(n, balanced_count(n, rng), rng))
    sol = solve_balanced_2tsp(inst)
    assert evaluate_solution(inst, sol).feasible
    assert sol.total >= oracle_2tsp(inst).total


def test_lowmem_matches_on_float_data():
    for seed in range(30):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 13))
        inst = ordered_2tsp(kalmanson_2tsp(n, balanced_count(n, rng), seed))
        full = solve_balanced_2tsp(inst).total
        assert solve_balanced_2tsp_lowmem(inst) == pytest.approx(full, rel=1e-9)
    sol = solve_balanced_2tsp_lowmem(inst, reconstruct=True)
    assert isinstance(sol, TwoTourSolution)


def test_all_fixed_is_twice_a_tour():
    rng = np.random.default_rng(4)
    c = integer_kalmanson(6, rng)
    sol = solve_balanced_2tsp(TwoTspInstance(c, set(range(6))))
    assert sol.tour1 == sol.tour2[::-1]


def test_near_balanced_sizes():
    rng = np.random.default_rng(2)
    inst = TwoTspInstance(integer_kalmanson(7, rng), {0, 3}, near_balanced=True)
    sol = solve_balanced_2tsp(inst)
    sizes = sorted([len(sol.tour1) - 1, len(sol.tour2) - 1])
    assert sizes == [4, 5]
    assert sol.total == oracle_2tsp(inst).total


def test_evaluator_reports_violations():
    c = random_symmetric(6, np.random.default_rng(0))
    inst = TwoTspInstance(c, {0, 1})
    bad = TwoTourSolution.from_tours(c, [0, 1, 2, 3, 4], [0, 5])
    ev = evaluate_solution(inst, bad)
    assert not ev.feasible
    assert any("fixed node" in v for v in ev.violations)
    assert any("balance" in v for v in ev.violations)
    good = TwoTourSolution.from_tours(c, [0, 1, 2, 3], [0, 1, 4, 5])
    wrong_total = TwoTourSolution(good.tour1, good.tour2, good.total + 1)
    assert evaluate_solution(inst, good).feasible
    assert any("mismatch" in v for v in evaluate_solution(inst, wrong_total).violations)


def test_oracle_guard():
    c = random_symmetric(12, np.random.default_rng(0))
    with pytest.raises(SizeGuardError):
        oracle_2tsp(TwoTspInstance(c, set(range(8))))
