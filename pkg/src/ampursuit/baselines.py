"""Reference solvers: greedy pursuits, a proximal-gradient relaxation, and
the exhaustive oracle.  All emit Solutions costed under the same objective
as the adaptive solver so comparison rows are apples to apples."""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

from .model import (
    Solution,
    SparseProblem,
    cost as objective,
    restricted_coeffs,
    scatter_solution,
    support_cost,
)


class TooLarge(ValueError):
    pass


class MaxIterError(RuntimeError):
    pass


@dataclass
class BaselineConfig:
    solver: str  # omp | nnomp | cosamp | fista | brute
    k: int | None = None
    l1: float | None = None
    l2: float | None = None
    max_iter: int = 5000
    tol: float = 1e-7


def solve_baseline(prob: SparseProblem, cfg: BaselineConfig) -> Solution:
    """Dispatch one reference solver from its config."""
    if cfg.solver == "omp":
        return omp(prob, cfg.k)
    if cfg.solver == "nnomp":
        return nnomp(prob, cfg.k)
    if cfg.solver == "cosamp":
        return cosamp(prob, cfg.k, max_iter=min(cfg.max_iter, 50), tol=cfg.tol)
    if cfg.solver == "fista":
        return fista_enet(prob, cfg.l1, cfg.l2, max_iter=cfg.max_iter, tol=cfg.tol)
    if cfg.solver == "brute":
        return brute_force(prob, max_support=cfg.k)
    raise ValueError(f"unknown baseline {cfg.solver!r}")


def _solution_from_dense(prob: SparseProblem, x: np.ndarray) -> Solution:
    gamma = (x != 0.0).astype(np.float64)
    sol = Solution(x=x, gamma=gamma, cost=0.0)
    sol.cost = objective(prob, sol)
    return sol


def omp(prob: SparseProblem, k: int) -> Solution:
    """Greedy max-correlation selection with a ridge refit each round."""
    if not 1 <= k <= prob.p:
        raise ValueError(f"k must be in [1, {prob.p}], got {k}")
    selected: list[int] = []
    active = np.zeros(prob.p, dtype=bool)
    r = prob.y.copy()
    xS = np.zeros(0)
    for _ in range(k):
        c = prob.A.T @ r
        c[active] = 0.0
        pick = int(np.argmax(np.abs(c)))
        if c[pick] == 0.0:
            break
        selected.append(pick)
        active[pick] = True
        xS = restricted_coeffs(prob, selected)
        r = prob.y - prob.A[:, selected] @ xS
    return scatter_solution(prob, selected, xS)


def nnomp(prob: SparseProblem, k: int) -> Solution:
    """Nonnegative pursuit: select by positive correlation, refit with the
    active-set nonnegative solver."""
    if not 1 <= k <= prob.p:
        raise ValueError(f"k must be in [1, {prob.p}], got {k}")
    nn_prob = replace(prob, nonneg=True)
    selected: list[int] = []
    active = np.zeros(prob.p, dtype=bool)
    r = prob.y.copy()
    xS = np.zeros(0)
    for _ in range(k):
        c = prob.A.T @ r
        c[active] = -np.inf
        pick = int(np.argmax(c))
        if c[pick] <= 0.0:
            break
        selected.append(pick)
        active[pick] = True
        xS = restricted_coeffs(nn_prob, selected)
        r = prob.y - prob.A[:, selected] @ xS
    return scatter_solution(nn_prob, selected, xS)


def cosamp(prob: SparseProblem, k: int, max_iter: int = 50, tol: float = 1e-7) -> Solution:
    """Compressive sampling matching pursuit: merge the 2k strongest proxy
    indices with the current support, refit, prune back to k."""
    if not 1 <= k <= prob.p:
        raise ValueError(f"k must be in [1, {prob.p}], got {k}")
    x = np.zeros(prob.p)
    best_x, best_rn = x, np.linalg.norm(prob.y)
    r = prob.y.copy()
    ynorm = np.linalg.norm(prob.y)
    prev = np.inf
    for _ in range(max_iter):
        proxy = np.abs(prob.A.T @ r)
        wide = min(2 * k, prob.p)
        omega = np.argpartition(proxy, -wide)[-wide:]
        T = np.union1d(omega, np.flatnonzero(x))
        b = restricted_coeffs(prob, T)
        keep = np.argsort(np.abs(b))[-k:]
        x = np.zeros(prob.p)
        x[T[keep]] = b[keep]
        r = prob.y - prob.A @ x
        rn = np.linalg.norm(r)
        if rn < best_rn:
            best_x, best_rn = x, rn
        if rn <= tol * ynorm or rn >= prev * (1.0 - tol):
            break
        prev = rn
    return _solution_from_dense(prob, best_x)


def fista_enet(prob: SparseProblem, w1: float, w2: float,
               max_iter: int = 5000, tol: float = 1e-7) -> Solution:
    """Accelerated proximal gradient on the elastic-net relaxation
    ||y - A x||^2 + w2*||x||^2 + w1*||x||_1 (prox clamped at zero in
    nonnegative mode).  Raises MaxIterError if the relative objective
    change never falls below tol."""
    if w1 < 0 or w2 < 0:
        raise ValueError("elastic-net weights must be nonnegative")
    A, y = prob.A, prob.y
    step = 1.0 / (2.0 * (np.linalg.norm(A, 2) ** 2 + w2))
    thresh = w1 * step

    def smooth_grad(v):
        return 2.0 * (A.T @ (A @ v - y) + w2 * v)

    def full_objective(v):
        r = y - A @ v
        return r @ r + w2 * (v @ v) + w1 * np.abs(v).sum()

    def prox(v):
        if prob.nonneg:
            return np.maximum(v - thresh, 0.0)
        return np.sign(v) * np.maximum(np.abs(v) - thresh, 0.0)

    x = np.zeros(prob.p)
    z = x.copy()
    t = 1.0
    f_old = full_objective(x)
    for _ in range(max_iter):
        x_new = prox(z - step * smooth_grad(z))
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        z = x_new + ((t - 1.0) / t_new) * (x_new - x)
        f_new = full_objective(x_new)
        if f_new > f_old:  # function-value restart: drop stale momentum
            z = x_new.copy()
            t_new = 1.0
        x, t = x_new, t_new
        if abs(f_new - f_old) <= tol * max(1.0, abs(f_old)):
            return _solution_from_dense(prob, x)
        f_old = f_new
    raise MaxIterError(f"no convergence within {max_iter} iterations")


def brute_force(prob: SparseProblem, max_support: int | None = None) -> Solution:
    """Global minimizer by exhaustive support enumeration.

    Enumerates every support (or every support up to max_support) and keeps
    the one with the smallest exact restricted cost; the correctness oracle
    for everything else in the package.
    """
    p = prob.p
    if max_support is None:
        if p > 14:
            raise TooLarge(f"p={p} exceeds the full-enumeration budget (14)")
        max_support = p
    best_g = support_cost(prob, ())[0]
    best_idx: tuple = ()
    best_x = np.zeros(0)
    for size in range(1, max_support + 1):
        for idx in combinations(range(p), size):
            g, xS = support_cost(prob, idx)
            if g < best_g:
                best_g, best_idx, best_x = g, idx, xS
    sol = scatter_solution(prob, best_idx, best_x)
    return sol
