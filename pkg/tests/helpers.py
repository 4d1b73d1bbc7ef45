"""Shared instance builders for the tests."""
import numpy as np

from tworoute.generator import GeneratorParams, generate_2tsp_instance
from tworoute.matrices import permute
from tworoute.two_tsp import TwoTspInstance
from tworoute.twovrp import Customer, TwoVrpInstance


def random_symmetric(n, rng, lo=1, hi=20):
    a = rng.integers(lo, hi, (n, n)).astype(float)
    a = np.triu(a, 1)
    return a + a.T


def random_2tsp(n, fixed_count, rng):
    others = rng.choice(np.arange(1, n), fixed_count - 1, replace=False)
    return TwoTspInstance(random_symmetric(n, rng), {0, *map(int, others)})


def ordered_2tsp(gen):
    """The generated instance relabeled so that its matrix is Kalmanson."""
    order = gen.hidden_order
    pos = np.empty(len(order), dtype=int)
    pos[order] = np.arange(len(order))
    inst = gen.instance
    return TwoTspInstance(permute(inst.matrix, order), {int(pos[s]) for s in inst.fixed})


def kalmanson_2tsp(n, fixed_count, seed):
    return generate_2tsp_instance(GeneratorParams(n, seed=seed), fixed_count)


def random_2vrp(n, rng, with_inf=True, tight=True):
    """Interval customers with asymmetric costs, some fixed, some one-way."""
    size = 4 + 2 * n
    c1 = rng.integers(1, 30, (size, size)).astype(float)
    c2 = c1 * rng.uniform(0.8, 1.5) + rng.integers(0, 5, (size, size))
    np.fill_diagonal(c1, 0.0)
    np.fill_diagonal(c2, 0.0)
    demand = rng.integers(1, 4, n).astype(float)
    customers = []
    for k in range(n):
        a, b = 4 + 2 * k, 5 + 2 * k
        l1l, l1r = float(rng.integers(0, 10)), float(rng.integers(0, 10))
        if with_inf and rng.random() < 0.25:
            l1r = np.inf
        fixed = int(rng.choice([0, 1, 2], p=[0.6, 0.2, 0.2]))
        customers.append(Customer(a, b, l1l, l1r, 1.3 * l1l, 1.3 * l1r, demand[k], fixed))
    total = demand.sum()
    cap = float(np.ceil(0.6 * total)) if tight else float(total)
    return TwoVrpInstance(tuple(customers), 0, 1, 2, 3, cap, cap, c1, c2)


def integer_kalmanson(n, rng):
    """A strong Kalmanson matrix with integer entries (exact float arithmetic)."""
    from tworoute.generator import build_kalmanson

    first = rng.integers(1, 30, n - 1)
    betas = rng.integers(1, 6, n - 3)
    alphas = rng.integers(1, 6, (n - 3) * (n - 2) // 2)
    return build_kalmanson(first, int(rng.integers(1, 30)), betas, alphas).shifted


def fixed_set(n, fixed_count, rng):
    others = rng.choice(np.arange(1, n), fixed_count - 1, replace=False)
    return {0, *map(int, others)}


def balanced_count(n, rng):
    """A fixed-set size in [1, n] with n + size even."""
    f = int(rng.integers(1, n + 1))
    if (n + f) % 2:
        f = f + 1 if f < n else f - 1
    return f


ACCEPTANCE = {}


def record(criterion, ok, detail):
    """Remember and print one acceptance line; the terminal summary repeats them."""
    line = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return ok
