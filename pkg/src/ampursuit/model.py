"""Problem definition, penalty conversion, and exact objective algebra.

The recovery objective is

    ||y - A x||^2 + lam * ||x||^2 + sum_i rho_i * gamma_i

over coefficients x and binary activity indicators gamma.  Everything here
works in measurement space: the ridge term is folded in analytically, the
augmented stacked system [A; sqrt(lam) I] is never materialized at full
size (only compact per-support copies inside the exact-cost oracle).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls as _lawson_hanson_nnls

from .cholesky import DimensionMismatch


class ZeroColumn(ValueError):
    def __init__(self, index: int):
        super().__init__(f"column {index} has zero norm")
        self.index = index


def normalize_columns(A_raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scale every column to unit 2-norm; returns (matrix, original norms)."""
    A_raw = np.asarray(A_raw, dtype=np.float64)
    scales = np.linalg.norm(A_raw, axis=0)
    zero = np.flatnonzero(scales == 0.0)
    if zero.size:
        raise ZeroColumn(int(zero[0]))
    return A_raw / scales, scales


@dataclass
class PriorParams:
    """Spike-and-slab hyperparameters: noise std, activation probabilities,
    and the slab precision scale."""

    sigma: float
    kappa: np.ndarray
    lam: float

    def __post_init__(self):
        self.kappa = np.atleast_1d(np.asarray(self.kappa, dtype=np.float64))
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if np.any(self.kappa <= 0) or np.any(self.kappa >= 1):
            raise ValueError("every kappa must lie strictly in (0, 1)")


def rho_from_prior(params: PriorParams) -> np.ndarray:
    """Per-index activation penalties implied by the prior.

    rho_i = sigma^2 * log(2*pi*sigma^2*(1-kappa_i)^2 / (lam*kappa_i^2));
    large kappa makes the penalty negative, i.e. activation is rewarded.
    """
    s2 = params.sigma**2
    k = params.kappa
    return s2 * np.log(2.0 * np.pi * s2 * (1.0 - k) ** 2 / (params.lam * k**2))


@dataclass
class SparseProblem:
    """Measurement matrix with unit-norm columns, observation, ridge weight,
    per-index activation penalties, and the optional nonnegativity flag."""

    A: np.ndarray
    y: np.ndarray
    lam: float
    rho: np.ndarray
    nonneg: bool = False

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        self.rho = np.asarray(self.rho, dtype=np.float64)
        q, p = self.A.shape
        if self.y.shape != (q,):
            raise DimensionMismatch(f"y has shape {self.y.shape}, expected ({q},)")
        if self.rho.shape != (p,):
            raise DimensionMismatch(f"rho has shape {self.rho.shape}, expected ({p},)")
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        norms = np.linalg.norm(self.A, axis=0)
        if np.any(np.abs(norms - 1.0) > 1e-8):
            bad = int(np.argmax(np.abs(norms - 1.0)))
            raise ValueError(
                f"column {bad} has norm {norms[bad]:.12g}; normalize first "
                "(see SparseProblem.from_unnormalized)"
            )

    @classmethod
    def from_unnormalized(cls, A_raw, y, lam, rho, nonneg=False) -> "SparseProblem":
        A, _ = normalize_columns(A_raw)
        return cls(A=A, y=y, lam=lam, rho=rho, nonneg=nonneg)

    @property
    def q(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.A.shape[1]


class Support:
    """Ordered active set: insertion order matches the factor column order,
    plus a membership bitmap for O(1) lookups."""

    def __init__(self, p: int, indices=()):
        self.p = p
        self.order: list[int] = []
        self.mask = np.zeros(p, dtype=bool)
        for i in indices:
            self.add(int(i))

    def add(self, index: int) -> None:
        if self.mask[index]:
            raise ValueError(f"index {index} already active")
        self.order.append(index)
        self.mask[index] = True

    def remove(self, index: int) -> int:
        """Drop an active index; returns its factor column position."""
        if not self.mask[index]:
            raise ValueError(f"index {index} not active")
        pos = self.order.index(index)
        del self.order[pos]
        self.mask[index] = False
        return pos

    def indices(self) -> np.ndarray:
        return np.asarray(self.order, dtype=np.intp)

    def copy(self) -> "Support":
        return Support(self.p, self.order)

    def __len__(self) -> int:
        return len(self.order)

    def __contains__(self, index) -> bool:
        return bool(self.mask[index])

    def __repr__(self) -> str:
        return f"Support(p={self.p}, order={self.order})"


@dataclass
class Solution:
    """Full-length coefficients, activity indicators, and objective value."""

    x: np.ndarray
    gamma: np.ndarray
    cost: float

    def support_indices(self) -> np.ndarray:
        return np.flatnonzero(self.gamma)


def cost(prob: SparseProblem, sol: Solution) -> float:
    """Exact objective of a candidate solution."""
    x = np.asarray(sol.x, dtype=np.float64)
    gamma = np.asarray(sol.gamma, dtype=np.float64)
    if x.shape != (prob.p,) or gamma.shape != (prob.p,):
        raise DimensionMismatch(
            f"solution shapes {x.shape}/{gamma.shape} vs p={prob.p}"
        )
    r = prob.y - prob.A @ x
    return float(r @ r + prob.lam * (x @ x) + prob.rho @ gamma)


def _support_indices(S) -> np.ndarray:
    if isinstance(S, Support):
        return S.indices()
    return np.asarray(list(S), dtype=np.intp)


def support_cost(prob: SparseProblem, S) -> tuple[float, np.ndarray]:
    """Exact restricted minimum of the objective over a given support.

    Minimizes ||y - A_S x||^2 + lam*||x||^2 over the active coefficients
    (over x >= 0 when the problem is flagged nonnegative) and adds the
    activation penalties.  Solved through a compact stacked least-squares
    system, deliberately independent of the incremental-factor path, so it
    can serve as the oracle in tests and in exhaustive search.
    """
    idx = _support_indices(S)
    if idx.size == 0:
        return float(prob.y @ prob.y), np.zeros(0)
    Asub = prob.A[:, idx]
    s = idx.size
    aug = np.vstack([Asub, np.sqrt(prob.lam) * np.eye(s)])
    rhs = np.concatenate([prob.y, np.zeros(s)])
    if prob.nonneg:
        xS, _ = _lawson_hanson_nnls(aug, rhs)
    else:
        xS = np.linalg.lstsq(aug, rhs, rcond=None)[0]
    r = prob.y - Asub @ xS
    g = float(r @ r + prob.lam * (xS @ xS) + prob.rho[idx].sum())
    return g, xS


def restricted_coeffs(prob: SparseProblem, indices) -> np.ndarray:
    """Ridge (or nonnegative ridge) refit on an index set; shared by the
    greedy baselines so every solver faces the same objective."""
    return support_cost(prob, indices)[1]


def residual_correlation(prob: SparseProblem, S: Support, xS: np.ndarray, i: int) -> float:
    """Inner product of the augmented-space residual with column i.

    For i outside the support this is (y - A_S xS) . a_i; for an active
    index the hidden ridge block contributes an extra -lam * x_i term.
    Computed without materializing the stacked system.
    """
    idx = S.indices()
    r = prob.y - prob.A[:, idx] @ xS if idx.size else prob.y.copy()
    val = float(prob.A[:, i] @ r)
    if i in S:
        val -= prob.lam * float(xS[S.order.index(i)])
    return val


def residual_correlations(prob: SparseProblem, S: Support, xS: np.ndarray,
                          r: np.ndarray | None = None) -> np.ndarray:
    """Vectorized residual_correlation over every column."""
    if r is None:
        idx = S.indices()
        r = prob.y - prob.A[:, idx] @ xS if idx.size else prob.y
    c = prob.A.T @ r
    if len(S):
        c[S.indices()] -= prob.lam * xS
    return c


def scatter_solution(prob: SparseProblem, S, xS: np.ndarray) -> Solution:
    """Assemble a full-length Solution from restricted coefficients."""
    idx = _support_indices(S)
    x = np.zeros(prob.p)
    gamma = np.zeros(prob.p)
    x[idx] = xS
    gamma[idx] = 1.0
    sol = Solution(x=x, gamma=gamma, cost=0.0)
    sol.cost = cost(prob, sol)
    return sol
