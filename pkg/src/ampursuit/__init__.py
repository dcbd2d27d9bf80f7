"""Sparse recovery by adaptive matching pursuit under spike-and-slab
penalties, with incremental Cholesky maintenance of the active set,
reference baselines, and benchmark harnesses."""

from .cholesky import (
    BACKWARD,
    FORWARD,
    CholFactor,
    chol_full,
    chol_insert,
    chol_remove,
    rank_one_update,
    tri_solve,
)
from .model import (
    PriorParams,
    Solution,
    SparseProblem,
    Support,
    cost,
    normalize_columns,
    residual_correlation,
    rho_from_prior,
    support_cost,
)
from .nnls import NnAdmmConfig, nnls_admm
from .solver import (
    AmpConfig,
    AmpState,
    SolverReport,
    amp,
    init_support,
    insertion_bound,
    removal_bound,
    solve_coeffs,
)
from .baselines import (
    BaselineConfig,
    brute_force,
    cosamp,
    fista_enet,
    nnomp,
    omp,
    solve_baseline,
)
from .bench import (
    ExperimentResult,
    SynthSpec,
    gen_problem,
    metrics,
    run_image_recovery,
    run_sweep,
    run_table,
)
from .datasets import ImageSet, read_idx, read_pgm, write_pgm

__version__ = "0.1.0"

__all__ = [
    "AmpConfig",
    "AmpState",
    "BACKWARD",
    "BaselineConfig",
    "CholFactor",
    "ExperimentResult",
    "FORWARD",
    "ImageSet",
    "NnAdmmConfig",
    "PriorParams",
    "Solution",
    "SolverReport",
    "SparseProblem",
    "Support",
    "SynthSpec",
    "amp",
    "brute_force",
    "chol_full",
    "chol_insert",
    "chol_remove",
    "cosamp",
    "cost",
    "fista_enet",
    "gen_problem",
    "init_support",
    "insertion_bound",
    "metrics",
    "nnls_admm",
    "nnomp",
    "normalize_columns",
    "omp",
    "rank_one_update",
    "read_idx",
    "read_pgm",
    "removal_bound",
    "residual_correlation",
    "rho_from_prior",
    "run_image_recovery",
    "run_sweep",
    "run_table",
    "solve_baseline",
    "solve_coeffs",
    "support_cost",
    "tri_solve",
    "write_pgm",
]
