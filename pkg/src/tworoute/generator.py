"""Random (permuted) Kalmanson matrices and 2TSP instances with known optima.

The matrix is built from its first row, one extra entry ``c[1, n-1]`` and
the adjacent differences alpha/beta, then shifted to be nonnegative and
optionally disguised by a random simultaneous row/column permutation.

Random draws come from numpy's PCG64 generator in a fixed order: first-row
entries, ``c[1, n-1]``, betas by index, alphas row by row, then the
disguising permutation. The fixed set of a 2TSP instance comes from a
second stream seeded with ``(seed, 1)`` so it never perturbs the matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .matrices import check_permutation, cyclic_shift, inverse, permute, symmetric_matrix

if TYPE_CHECKING:
    from .two_tsp import TwoTspInstance


@dataclass(frozen=True)
class GeneratorParams:
    n: int
    value_range: tuple[float, float] = (0.1, 1.1)
    seed: int = 0
    permute_output: bool = True
    strong: bool = True

    def __post_init__(self):
        lo, hi = self.value_range
        if self.n < 4:
            raise ValueError("n must be at least 4")
        if hi < lo:
            raise ValueError("value_range must satisfy lo <= hi")
        if self.strong and lo <= 0:
            raise ValueError("strong matrices need strictly positive alpha/beta (lo > 0)")
        if lo < 0:
            raise ValueError("value_range must be nonnegative")


@dataclass
class KalmansonStages:
    """Intermediate matrices of the construction (used for inspection and tests)."""

    borders: np.ndarray  # first/last rows and columns filled
    raw: np.ndarray  # all entries filled, possibly negative
    shifted: np.ndarray  # nonnegative Kalmanson matrix


@dataclass
class GeneratedInstance:
    matrix: np.ndarray
    hidden_order: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray
    kalmanson: np.ndarray = field(repr=False)


def build_kalmanson(first_row, c2n, betas, alphas) -> KalmansonStages:
    """Deterministic part of the construction.

    ``first_row`` holds ``c[0, 1..n-1]``; ``betas`` has ``n-3`` entries for
    rows ``1..n-3``; ``alphas`` is either a mapping ``(i, j) -> value`` on
    0-based indices ``0 <= i <= n-4, i+2 <= j <= n-2`` or a flat sequence in
    row-major order over those pairs.
    """
    first_row = np.asarray(first_row, dtype=float)
    n = len(first_row) + 1
    betas = np.asarray(betas, dtype=float)
    if len(betas) != n - 3:
        raise ValueError(f"expected {n - 3} betas, got {len(betas)}")
    pairs = [(i, j) for i in range(n - 3) for j in range(i + 2, n - 1)]
    if isinstance(alphas, dict):
        alpha = {k: float(v) for k, v in alphas.items()}
    else:
        flat = np.asarray(alphas, dtype=float)
        if len(flat) != len(pairs):
            raise ValueError(f"expected {len(pairs)} alphas, got {len(flat)}")
        alpha = dict(zip(pairs, flat.tolist()))
    if set(alpha) != set(pairs):
        raise ValueError("alphas must cover exactly the adjacent index pairs")

    c = np.full((n, n), np.nan)
    np.fill_diagonal(c, 0.0)

    def put(i, j, v):
        c[i, j] = c[j, i] = v

    for j in range(1, n):
        put(0, j, first_row[j - 1])
    put(1, n - 1, float(c2n))
    for i in range(2, n - 1):
        put(i, n - 1, c[i, 0] + c[i - 1, n - 1] - c[i - 1, 0] - betas[i - 2])
    borders = c.copy()

    for i in range(1, n - 2):
        for j in range(n - 2, i, -1):
            put(i, j, c[i - 1, j] + c[i, j + 1] - c[i - 1, j + 1] - alpha[(i - 1, j)])
    raw = c.copy()

    off = ~np.eye(n, dtype=bool)
    low = raw[off].min()
    shifted = raw.copy()
    if low < 0:
        shifted[off] -= low
    return KalmansonStages(borders, raw, shifted)


def generate_kalmanson(params: GeneratorParams) -> GeneratedInstance:
    n = params.n
    lo, hi = params.value_range
    rng = np.random.default_rng(params.seed)
    first_row = rng.uniform(lo, hi, n - 1)
    c2n = rng.uniform(lo, hi)
    betas = rng.uniform(lo, hi, n - 3)
    alphas = rng.uniform(lo, hi, (n - 3) * (n - 2) // 2)
    stages = build_kalmanson(first_row, c2n, betas, alphas)
    kal = symmetric_matrix(stages.shifted)
    if params.permute_output:
        phi = rng.permutation(n)
        matrix = symmetric_matrix(permute(kal, phi))
        hidden = inverse(phi)
    else:
        matrix = kal
        hidden = np.arange(n)
    return GeneratedInstance(matrix, hidden, alphas, betas, kal)


@dataclass
class GeneratedTwoTsp:
    """A balanced 2TSP instance whose optimum is known by construction.

    ``hidden_order`` starts with node 0 and permutes ``instance.matrix``
    into a Kalmanson matrix.
    """

    instance: "TwoTspInstance"
    optimum: float
    hidden_order: np.ndarray
    generated: GeneratedInstance = field(repr=False)


def generate_2tsp_instance(params: GeneratorParams, fixed_count: int,
                           near_balanced: bool = False) -> GeneratedTwoTsp:
    from .two_tsp import TwoTspInstance, solve_balanced_2tsp

    n = params.n
    if not 1 <= fixed_count <= n:
        raise ValueError("fixed_count must lie in [1, n]")
    if (n + fixed_count) % 2 and not near_balanced:
        raise ValueError("n + fixed_count must be even (enable near_balanced to allow odd totals)")
    gen = generate_kalmanson(params)
    # any cyclic shift of a Kalmanson order is again one; start it at node 0
    hidden = check_permutation(gen.hidden_order)
    hidden = cyclic_shift(hidden, int(np.flatnonzero(hidden == 0)[0]))
    rng = np.random.default_rng([params.seed, 1])
    others = rng.choice(np.arange(1, n), size=fixed_count - 1, replace=False)
    fixed = frozenset([0, *map(int, others)])
    inst = TwoTspInstance(gen.matrix, fixed, near_balanced=near_balanced)
    ordered = TwoTspInstance(permute(gen.matrix, hidden),
                             frozenset(int(np.flatnonzero(hidden == s)[0]) for s in fixed),
                             near_balanced=near_balanced)
    optimum = solve_balanced_2tsp(ordered).total
    return GeneratedTwoTsp(inst, optimum, hidden, gen)
