"""Incremental Cholesky factorization of active-set Gram matrices.

The pursuit solver keeps a lower-triangular factor L of the Gram matrix of
the currently selected columns and updates it in O(order^2) when a column
enters or leaves the active set, instead of refactorizing from scratch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular


class DimensionMismatch(ValueError):
    pass


class ZeroDiagonal(ValueError):
    """The factor has a non-positive diagonal entry and is unusable."""


class NotPositiveDefinite(ValueError):
    pass


class NegativePivot(ValueError):
    """Appending this column would require the square root of a
    non-positive pivot; the caller must reject the insertion."""


class IndexOutOfRange(IndexError):
    pass


# Pivot tolerance for column insertion.  Unit-norm columns plus a positive
# ridge keep the Gram matrix well conditioned, so a pivot at or below this
# level signals a (near-)duplicate column that must not enter the support.
PIVOT_EPS = 1e-12

FORWARD = "forward"
BACKWARD = "backward"


@dataclass
class CholFactor:
    """Lower-triangular factor: L @ L.T reproduces the source Gram matrix."""

    L: np.ndarray

    def __post_init__(self):
        self.L = np.asarray(self.L, dtype=np.float64)
        if self.L.ndim != 2 or self.L.shape[0] != self.L.shape[1]:
            raise DimensionMismatch(f"factor must be square, got {self.L.shape}")

    @property
    def order(self) -> int:
        return self.L.shape[0]

    @classmethod
    def empty(cls) -> "CholFactor":
        return cls(np.zeros((0, 0)))

    def gram(self) -> np.ndarray:
        """Reconstruct the Gram matrix L @ L.T (testing / diagnostics)."""
        return self.L @ self.L.T

    def copy(self) -> "CholFactor":
        return CholFactor(self.L.copy())


def tri_solve(factor: CholFactor, b: np.ndarray, mode: str = FORWARD) -> np.ndarray:
    """Solve L u = b (forward) or L.T x = b (backward).

    Raises DimensionMismatch if b does not match the factor order and
    ZeroDiagonal if the factor carries a non-positive diagonal entry.
    """
    b = np.asarray(b, dtype=np.float64)
    L = factor.L
    if b.shape != (factor.order,):
        raise DimensionMismatch(f"rhs length {b.shape} vs factor order {factor.order}")
    if factor.order == 0:
        return np.zeros(0)
    diag = np.diagonal(L)
    if np.any(diag <= 0.0):
        raise ZeroDiagonal("factor has a non-positive diagonal entry")
    if mode == FORWARD:
        return solve_triangular(L, b, lower=True, check_finite=False)
    if mode == BACKWARD:
        return solve_triangular(L, b, lower=True, trans="T", check_finite=False)
    raise ValueError(f"unknown mode {mode!r}")


def spd_solve(factor: CholFactor, b: np.ndarray) -> np.ndarray:
    """Solve (L L.T) x = b by forward then backward substitution."""
    return tri_solve(factor, tri_solve(factor, b, FORWARD), BACKWARD)


def chol_full(G: np.ndarray) -> CholFactor:
    """Factor a dense SPD Gram matrix from scratch (LAPACK-backed)."""
    G = np.asarray(G, dtype=np.float64)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise DimensionMismatch(f"Gram matrix must be square, got {G.shape}")
    try:
        L = np.linalg.cholesky(G) if G.size else np.zeros((0, 0))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    return CholFactor(L)


def chol_insert(factor: CholFactor, g: np.ndarray, diag: float,
                eps: float = PIVOT_EPS) -> CholFactor:
    """Extend the factor by one column of the Gram matrix.

    `g` holds the cross inner products of the new column against the
    currently factored ones and `diag` its squared norm.  The new last row
    is [v.T, sqrt(diag - v.T v)] with L v = g, so one forward substitution
    does all the work.
    """
    g = np.asarray(g, dtype=np.float64)
    n = factor.order
    if g.shape != (n,):
        raise DimensionMismatch(f"cross-product length {g.shape} vs order {n}")
    if diag <= 0.0:
        raise NegativePivot(f"non-positive diagonal entry {diag}")
    v = tri_solve(factor, g, FORWARD) if n else np.zeros(0)
    pivot = diag - v @ v
    if pivot <= eps:
        raise NegativePivot(f"insertion pivot {pivot:.3e} <= {eps}")
    out = np.zeros((n + 1, n + 1))
    out[:n, :n] = factor.L
    out[n, :n] = v
    out[n, n] = np.sqrt(pivot)
    return CholFactor(out)


def rank_one_update(factor: CholFactor, u: np.ndarray) -> CholFactor:
    """Return the factor of L L.T + u u.T.

    Classic sweep of Givens-like eliminations; always succeeds for the
    additive case because the updated matrix stays SPD.
    """
    u = np.asarray(u, dtype=np.float64)
    n = factor.order
    if u.shape != (n,):
        raise DimensionMismatch(f"update length {u.shape} vs order {n}")
    L = factor.L.copy()
    w = u.copy()
    for k in range(n):
        r = np.hypot(L[k, k], w[k])
        c = r / L[k, k]
        s = w[k] / L[k, k]
        L[k, k] = r
        if k + 1 < n:
            L[k + 1:, k] = (L[k + 1:, k] + s * w[k + 1:]) / c
            w[k + 1:] = c * w[k + 1:] - s * L[k + 1:, k]
    return CholFactor(L)


def chol_remove(factor: CholFactor, pos: int) -> CholFactor:
    """Drop row/column `pos` of the factored Gram matrix.

    The leading block and the sub-diagonal block below the removed row are
    unchanged; the trailing block absorbs the removed column's contribution
    through a rank-one update, so the arithmetic cost is O((order-pos)^2).
    """
    n = factor.order
    if not 0 <= pos < n:
        raise IndexOutOfRange(f"position {pos} out of range for order {n}")
    L = factor.L
    out = np.zeros((n - 1, n - 1))
    out[:pos, :pos] = L[:pos, :pos]
    out[pos:, :pos] = L[pos + 1:, :pos]
    trailing = rank_one_update(CholFactor(L[pos + 1:, pos + 1:]), L[pos + 1:, pos])
    out[pos:, pos:] = trailing.L
    return CholFactor(out)
