"""Nonnegative quadratic programming over a fixed Gram system via ADMM.

Solves min_x x.T G x - 2 w.T x subject to x >= 0, which is the restricted
coefficient subproblem of the nonnegative pursuit variant.  The splitting
introduces a copy variable carrying the orthant constraint; the x-update is
a single SPD solve against G + mu*I whose factor is computed once per call
(or maintained incrementally by the solver and passed in).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cholesky import CholFactor, chol_full, spd_solve


@dataclass
class NnAdmmConfig:
    penalty: float = 1.0
    max_iter: int = 500
    tol: float = 1e-8


def nnls_admm(gram: np.ndarray, w: np.ndarray, cfg: NnAdmmConfig | None = None) -> np.ndarray:
    """Nonnegative minimizer of x.T gram x - 2 w.T x for an SPD gram."""
    cfg = cfg or NnAdmmConfig()
    gram = np.asarray(gram, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    n = w.shape[0]
    shifted = chol_full(gram + cfg.penalty * np.eye(n))
    x, _, _, _, _ = admm_iterate(shifted, w, cfg)
    return x


def admm_iterate(shift_factor: CholFactor, w: np.ndarray, cfg: NnAdmmConfig,
                 v0: np.ndarray | None = None, u0: np.ndarray | None = None):
    """Run the ADMM loop against a prefactored G + mu*I.

    Returns (x, v, u, iterations, converged) where x = v is the projected
    (feasible) iterate; v/u allow warm starts across related calls.  A run
    that exhausts max_iter returns the best iterate with converged=False.
    """
    n = w.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros(0), np.zeros(0), 0, True
    mu = cfg.penalty
    v = np.maximum(v0, 0.0) if v0 is not None else np.zeros(n)
    u = u0.copy() if u0 is not None else np.zeros(n)
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        x = spd_solve(shift_factor, w + mu * (v - u))
        v_new = np.maximum(x + u, 0.0)
        u += x - v_new
        primal = np.linalg.norm(x - v_new)
        dual = mu * np.linalg.norm(v_new - v)
        v = v_new
        if primal <= cfg.tol and dual <= cfg.tol:
            converged = True
            break
    return v, v, u, it, converged
