"""Cost matrices, permutations and structural checks.

Nodes are 0-based throughout the library: node ``0`` is the home/depot
city (written as ``1`` in text files and in the usual mathematical
notation).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

#: Relative tolerance used by all inequality checks.
EPS = 1e-9


class MatrixError(ValueError):
    pass


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a structural check.

    ``witness`` is the lexicographically smallest violating index tuple
    (0-based) and ``condition`` names the inequality that failed.
    """

    holds: bool
    witness: Optional[tuple] = None
    condition: Optional[str] = None

    def __bool__(self) -> bool:
        return self.holds


def symmetric_matrix(data) -> np.ndarray:
    """Validate ``data`` as a symmetric cost matrix and return a read-only copy."""
    c = np.array(data, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise MatrixError(f"expected a square matrix, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise MatrixError("symmetric cost matrices must be finite")
    if np.any(np.diag(c) != 0):
        raise MatrixError("diagonal must be zero")
    if np.any(c < 0):
        raise MatrixError("entries must be nonnegative")
    if not np.array_equal(c, c.T):
        raise MatrixError("matrix is not symmetric")
    c.setflags(write=False)
    return c


def asymmetric_matrix(data) -> np.ndarray:
    """Validate an asymmetric cost matrix; ``+inf`` marks forbidden arcs."""
    c = np.array(data, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise MatrixError(f"expected a square matrix, got shape {c.shape}")
    if np.any(np.isnan(c)) or np.any(c == -np.inf):
        raise MatrixError("entries must be real or +inf")
    if np.any(np.diag(c) != 0):
        raise MatrixError("diagonal must be zero")
    if np.any(c < 0):
        raise MatrixError("entries must be nonnegative")
    c.setflags(write=False)
    return c


def check_permutation(sigma: Sequence[int], order: Optional[int] = None) -> np.ndarray:
    s = np.asarray(sigma, dtype=np.int64)
    if s.ndim != 1:
        raise MatrixError("permutation must be one-dimensional")
    if order is not None and len(s) != order:
        raise MatrixError(f"permutation of order {len(s)} does not match {order}")
    if not np.array_equal(np.sort(s), np.arange(len(s))):
        raise MatrixError("not a bijection on 0..n-1")
    return s


def identity(n: int) -> np.ndarray:
    return np.arange(n, dtype=np.int64)


def inverse(sigma: Sequence[int]) -> np.ndarray:
    return np.argsort(check_permutation(sigma))


def permute(c: np.ndarray, sigma: Sequence[int]) -> np.ndarray:
    """Return the matrix with entries ``c[sigma[i], sigma[j]]``."""
    c = np.asarray(c)
    s = check_permutation(sigma, len(c))
    return c[np.ix_(s, s)]


def cyclic_shift(sigma: Sequence[int], k: int) -> np.ndarray:
    """Shift ``sigma`` left by ``k`` positions: ``result[i] = sigma[(i + k) % n]``."""
    s = check_permutation(sigma)
    if not 0 <= k < max(len(s), 1):
        raise MatrixError(f"shift {k} out of range for order {len(s)}")
    return np.roll(s, -k)


def zero_transform(c: np.ndarray) -> np.ndarray:
    """Subtract the first row and column: ``c'[i,j] = c[i,j] - c[i,0] - c[0,j]``.

    Row and column 0 and the diagonal are set to zero. The result may be
    negative and is returned as a plain array.
    """
    c = np.asarray(c, dtype=float)
    out = c - c[:, :1] - c[:1, :]
    out[0, :] = 0.0
    out[:, 0] = 0.0
    np.fill_diagonal(out, 0.0)
    return out


def _tol(c: np.ndarray) -> float:
    return EPS * float(np.max(np.abs(c))) if c.size else 0.0


def _violates(lhs, rhs, tol, strict):
    if strict:
        return rhs - lhs <= tol
    return lhs - rhs > tol


def _quadruple_check(c, strict, conditions) -> CheckResult:
    c = np.asarray(c, dtype=float)
    n = len(c)
    if n < 4:
        return CheckResult(True)
    tol = _tol(c)
    iu = np.triu_indices(n, 1)
    for i in range(n - 3):
        for j in range(i + 1, n - 2):
            ls, ms = iu[0], iu[1]
            keep = ls > j
            ls, ms = ls[keep], ms[keep]
            rhs = c[i, ls] + c[j, ms]
            bad = np.zeros(len(ls), dtype=bool)
            which = np.zeros(len(ls), dtype=np.int8)
            # condition 2 first so that condition 1 wins when both fail
            if 2 in conditions:
                v2 = _violates(c[i, ms] + c[j, ls], rhs, tol, strict)
                bad |= v2
                which[v2] = 2
            if 1 in conditions:
                v1 = _violates(c[i, j] + c[ls, ms], rhs, tol, strict)
                bad |= v1
                which[v1] = 1
            if bad.any():
                k = int(np.argmax(bad))  # triu order is lexicographic in (l, m)
                return CheckResult(False, (i, j, int(ls[k]), int(ms[k])), f"kalmanson-{which[k]}")
    return CheckResult(True)


def check_kalmanson(c: np.ndarray, strict: bool = False) -> CheckResult:
    """Check both Kalmanson inequalities over every quadruple ``i<j<l<m``."""
    return _quadruple_check(c, strict, (1, 2))


def check_demidenko(c: np.ndarray, strict: bool = False) -> CheckResult:
    """Check ``c[i,j] + c[l,m] <= c[i,l] + c[j,m]`` for all ``i<j<l<m``."""
    res = _quadruple_check(c, strict, (1,))
    if res.holds:
        return res
    return CheckResult(False, res.witness, "demidenko")


def kalmanson_alphas(c: np.ndarray) -> np.ndarray:
    """Adjacent differences ``c[i,j] + c[i+1,j+1] - c[i,j+1] - c[i+1,j]``.

    Returned as a full ``(n-1, n-1)`` array; only entries with
    ``0 <= i <= n-4`` and ``i+2 <= j <= n-2`` are meaningful, the rest are nan.
    """
    c = np.asarray(c, dtype=float)
    n = len(c)
    a = c[:-1, :-1] + c[1:, 1:] - c[:-1, 1:] - c[1:, :-1]
    i, j = np.indices(a.shape)
    a[~((i <= n - 4) & (j >= i + 2) & (j <= n - 2))] = np.nan
    return a


def kalmanson_betas(c: np.ndarray) -> np.ndarray:
    """``c[i,n-1] + c[i+1,0] - c[i,0] - c[i+1,n-1]`` for ``1 <= i <= n-3`` (others nan)."""
    c = np.asarray(c, dtype=float)
    n = len(c)
    b = np.full(n, np.nan)
    i = np.arange(1, n - 2)
    b[i] = c[i, n - 1] + c[i + 1, 0] - c[i, 0] - c[i + 1, n - 1]
    return b


def check_kalmanson_adjacent(c: np.ndarray, strict: bool = False) -> CheckResult:
    """Kalmanson recognition through the adjacent-index conditions.

    Equivalent to :func:`check_kalmanson` but needs only O(n^2) work.
    """
    c = np.asarray(c, dtype=float)
    n = len(c)
    if n < 4:
        return CheckResult(True)
    tol = _tol(c)
    alpha = kalmanson_alphas(c)
    beta = kalmanson_betas(c)
    with np.errstate(invalid="ignore"):
        bad_a = (alpha <= tol) if strict else (alpha < -tol)
        bad_b = (beta <= tol) if strict else (beta < -tol)
    hits = [("alpha", int(i), int(j)) for i, j in np.argwhere(bad_a)]
    hits += [("beta", int(i)) for i in np.flatnonzero(bad_b)]
    if not hits:
        return CheckResult(True)
    first = hits[0]
    return CheckResult(False, first[1:], first[0])


def is_anti_robinson(a: np.ndarray) -> bool:
    """``a[i,k] >= max(a[i,j], a[j,k])`` for all ``i<j<k``."""
    a = np.asarray(a, dtype=float)
    n = len(a)
    tol = _tol(a)
    for i in range(n):
        row = a[i, i + 1:]
        # non-decreasing moving right of the diagonal, non-increasing moving left
        if np.any(np.diff(row) < -tol) or np.any(np.diff(a[i, :i]) > tol):
            return False
    return True


def tour_length(c: np.ndarray, tour: Sequence[int]) -> float:
    """Closed tour length, summed exactly (closing edge back to ``tour[0]`` implicit)."""
    t = list(tour)
    if len(t) < 2:
        return 0.0
    return math.fsum(float(c[a, b]) for a, b in zip(t, t[1:] + t[:1]))
