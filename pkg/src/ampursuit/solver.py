"""Adaptive matching pursuit over the support lattice.

Each iteration resolves the restricted coefficients exactly (two triangular
solves, or ADMM under a nonnegativity constraint), then scores the best
single insertion and the best single removal through cheap upper bounds on
the objective change.  Whichever bound is more negative wins; if neither is
negative the current support is kept and the solver stops.  Accepted moves
strictly decrease the objective, so no support is ever revisited and
termination is guaranteed on the finite lattice.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .cholesky import (
    CholFactor,
    NegativePivot,
    chol_full,
    chol_insert,
    chol_remove,
    spd_solve,
)
from .model import (
    Solution,
    SparseProblem,
    Support,
    residual_correlations,
    scatter_solution,
)
from .nnls import NnAdmmConfig, admm_iterate

TERM_CONVERGED = "converged"
TERM_MAX_ITER = "max_iter"
TERM_NUMERICAL_REJECT = "numerical_reject"


@dataclass
class AmpConfig:
    max_iter: int | None = None  # None resolves to 10 * p at solve time
    pivot_eps: float = 1e-12
    nn_admm: NnAdmmConfig = field(default_factory=NnAdmmConfig)
    track_supports: bool = False


@dataclass
class AmpState:
    S: Support
    L: CholFactor
    xS: np.ndarray
    r: np.ndarray
    cost: float
    iter: int = 0
    # nonnegative mode only: factor of the mu-shifted Gram and ADMM warm start
    L_shift: CholFactor | None = None
    nn_warm: tuple[np.ndarray, np.ndarray] | None = None
    nn_converged: bool = True


@dataclass
class SolverReport:
    solution: Solution
    cost_trace: list[float]
    iterations: int
    wall_time: float
    termination: str
    nn_converged: bool = True
    support_trace: list[tuple[int, ...]] | None = None

    def to_dict(self) -> dict:
        return {
            "x": self.solution.x.tolist(),
            "gamma": self.solution.gamma.astype(int).tolist(),
            "cost": self.solution.cost,
            "cost_trace": self.cost_trace,
            "iterations": self.iterations,
            "wall_time": self.wall_time,
            "termination": self.termination,
            "nn_converged": self.nn_converged,
        }


def init_support(rho: np.ndarray) -> Support:
    """Indices with a negative activation penalty always belong to the
    optimal active set, so they seed the support (in ascending order)."""
    rho = np.asarray(rho, dtype=np.float64)
    return Support(len(rho), np.flatnonzero(rho < 0.0))


def initial_state(prob: SparseProblem, cfg: AmpConfig | None = None) -> AmpState:
    """Build the starting state: penalty-seeded support and its factor."""
    cfg = cfg or AmpConfig()
    S = init_support(prob.rho)
    idx = S.indices()
    Asub = prob.A[:, idx]
    gram = Asub.T @ Asub + prob.lam * np.eye(len(idx))
    state = AmpState(
        S=S,
        L=chol_full(gram),
        xS=np.zeros(len(idx)),
        r=prob.y.copy(),
        cost=float(prob.y @ prob.y),
    )
    if prob.nonneg:
        state.L_shift = chol_full(gram + cfg.nn_admm.penalty * np.eye(len(idx)))
    return state


def solve_coeffs(state: AmpState, prob: SparseProblem,
                 cfg: AmpConfig | None = None) -> np.ndarray:
    """Restricted coefficients on the current support.

    Unconstrained: forward then backward triangular solve against the
    maintained factor.  Nonnegative: ADMM against the mu-shifted factor,
    warm-started from the previous support's iterates.
    """
    cfg = cfg or AmpConfig()
    idx = state.S.indices()
    wS = prob.A[:, idx].T @ prob.y if idx.size else np.zeros(0)
    if not prob.nonneg:
        return spd_solve(state.L, wS)
    v0, u0 = state.nn_warm if state.nn_warm is not None else (None, None)
    xS, v, u, _, converged = admm_iterate(state.L_shift, wS, cfg.nn_admm, v0, u0)
    state.nn_warm = (v, u)
    state.nn_converged = state.nn_converged and converged
    return xS


def refresh(state: AmpState, prob: SparseProblem, cfg: AmpConfig | None = None) -> None:
    """Recompute coefficients, residual, and cost exactly for the current
    support (the post-move resolve; nothing is approximated incrementally)."""
    idx = state.S.indices()
    state.xS = solve_coeffs(state, prob, cfg)
    state.r = prob.y - prob.A[:, idx] @ state.xS if idx.size else prob.y.copy()
    state.cost = float(
        state.r @ state.r + prob.lam * (state.xS @ state.xS) + prob.rho[idx].sum()
    )


def insertion_bound(state: AmpState, prob: SparseProblem,
                    corr: np.ndarray | None = None,
                    exclude=()) -> tuple[float, int | None]:
    """Best upper bound on the objective change from one insertion.

    Candidate i scores rho_i - corr_i^2 / (1 + lam); in nonnegative mode
    only the positive part of the correlation counts.  Returns (+inf, None)
    when no candidate remains.
    """
    if corr is None:
        corr = residual_correlations(prob, state.S, state.xS, state.r)
    available = ~state.S.mask
    for i in exclude:
        available[i] = False
    cand = np.flatnonzero(available)
    if cand.size == 0:
        return np.inf, None
    c = corr[cand]
    if prob.nonneg:
        c = np.maximum(c, 0.0)
    vals = prob.rho[cand] - c**2 / (1.0 + prob.lam)
    t = int(np.argmin(vals))
    return float(vals[t]), int(cand[t])


def removal_bound(state: AmpState, prob: SparseProblem,
                  corr: np.ndarray | None = None) -> tuple[float, int | None]:
    """Best upper bound on the objective change from one removal.

    Active index j scores (1+lam)*x_j^2 + 2*d_j*x_j - rho_j where d_j is
    the augmented-space residual correlation (zero at an unconstrained
    optimum).  Returns (+inf, None) for an empty support.
    """
    if len(state.S) == 0:
        return np.inf, None
    if corr is None:
        corr = residual_correlations(prob, state.S, state.xS, state.r)
    idx = state.S.indices()
    d = corr[idx]
    vals = (1.0 + prob.lam) * state.xS**2 + 2.0 * d * state.xS - prob.rho[idx]
    t = int(np.argmin(vals))
    return float(vals[t]), int(idx[t])


def _insert(state: AmpState, prob: SparseProblem, i: int, cfg: AmpConfig) -> None:
    idx = state.S.indices()
    g = prob.A[:, idx].T @ prob.A[:, i] if idx.size else np.zeros(0)
    # may raise NegativePivot; nothing is mutated in that case
    L_new = chol_insert(state.L, g, 1.0 + prob.lam, eps=cfg.pivot_eps)
    if state.L_shift is not None:
        state.L_shift = chol_insert(state.L_shift, g,
                                    1.0 + prob.lam + cfg.nn_admm.penalty)
    state.L = L_new
    state.S.add(i)
    if state.nn_warm is not None:
        v, u = state.nn_warm
        state.nn_warm = (np.append(v, 0.0), np.append(u, 0.0))


def _remove(state: AmpState, prob: SparseProblem, j: int) -> None:
    pos = state.S.remove(j)
    state.L = chol_remove(state.L, pos)
    if state.L_shift is not None:
        state.L_shift = chol_remove(state.L_shift, pos)
    if state.nn_warm is not None:
        v, u = state.nn_warm
        state.nn_warm = (np.delete(v, pos), np.delete(u, pos))


def _barred_would_improve(prob: SparseProblem, corr: np.ndarray, barred: set[int]) -> bool:
    """Whether any numerically rejected candidate still scores a negative
    insertion bound against the current residual."""
    if not barred:
        return False
    bidx = np.fromiter(barred, dtype=np.intp)
    c = corr[bidx]
    if prob.nonneg:
        c = np.maximum(c, 0.0)
    return bool(np.min(prob.rho[bidx] - c**2 / (1.0 + prob.lam)) < 0.0)


def amp(prob: SparseProblem, cfg: AmpConfig | None = None) -> SolverReport:
    """Run the pursuit to convergence (or the iteration cap).

    Stops as soon as neither bound is negative; on a stop forced purely by
    numerically rejected insertions the termination is flagged instead of
    reported as converged.
    """
    cfg = cfg or AmpConfig()
    t0 = time.perf_counter()
    max_iter = cfg.max_iter if cfg.max_iter is not None else 10 * prob.p
    state = initial_state(prob, cfg)
    barred: set[int] = set()
    trace: list[float] = []
    supports: list[tuple[int, ...]] | None = [] if cfg.track_supports else None
    termination = TERM_MAX_ITER

    while True:
        state.iter += 1
        refresh(state, prob, cfg)
        trace.append(state.cost)
        if supports is not None:
            supports.append(tuple(state.S.order))
        corr = residual_correlations(prob, state.S, state.xS, state.r)
        u_val, u_idx = insertion_bound(state, prob, corr, exclude=barred)
        v_val, v_idx = removal_bound(state, prob, corr)

        stopped = False
        moved = False
        while not (moved or stopped):
            if min(u_val, v_val) >= 0.0:
                blocked = _barred_would_improve(prob, corr, barred)
                termination = TERM_NUMERICAL_REJECT if blocked else TERM_CONVERGED
                stopped = True
            elif state.iter >= max_iter:
                termination = TERM_MAX_ITER
                stopped = True
            elif u_val < v_val:
                try:
                    _insert(state, prob, u_idx, cfg)
                    moved = True
                except NegativePivot:
                    barred.add(u_idx)
                    u_val, u_idx = insertion_bound(state, prob, corr, exclude=barred)
            else:
                _remove(state, prob, v_idx)
                moved = True
        if stopped:
            break

    solution = scatter_solution(prob, state.S, state.xS)
    solution.cost = trace[-1]
    return SolverReport(
        solution=solution,
        cost_trace=trace,
        iterations=state.iter,
        wall_time=time.perf_counter() - t0,
        termination=termination,
        nn_converged=state.nn_converged,
        support_trace=supports,
    )
