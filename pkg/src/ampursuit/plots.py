"""Figure rendering for the report paths: sweep curves, benchmark bars,
and image-recovery grids, written next to the delimited output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .bench import ExperimentResult  # noqa: E402
from .datasets import SIDE, read_pgm  # noqa: E402

PANELS = [("time_s", "time (s)", "log"),
          ("mse", "MSE", "log"),
          ("cost", "cost", "log"),
          ("sm", "support match (%)", "linear")]


def save_sweep_figure(result: ExperimentResult, path) -> Path:
    """Four panels (time, MSE, cost, SM) versus sparsity, one curve per
    solver, from the aggregate rows."""
    path = Path(path)
    solvers = sorted({row.solver for row in result.aggregates})
    fig, axes = plt.subplots(1, 4, figsize=(16, 3.5))
    for ax, (field, label, scale) in zip(axes, PANELS):
        for solver in solvers:
            rows = sorted((r for r in result.aggregates if r.solver == solver),
                          key=lambda r: r.k)
            ks = [r.k for r in rows]
            vals = [getattr(r, field) for r in rows]
            ax.plot(ks, vals, marker="o", label=solver)
        ax.set_xlabel("nonzeros in the planted signal")
        ax.set_ylabel(label)
        ax.set_yscale(scale)
        ax.grid(True, alpha=0.3)
    axes[0].legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_bench_figure(result: ExperimentResult, path) -> Path:
    """Bar chart of the aggregate metrics by solver."""
    path = Path(path)
    rows = result.aggregates
    solvers = [r.solver for r in rows]
    fig, axes = plt.subplots(1, 4, figsize=(14, 3.2))
    for ax, (field, label, scale) in zip(axes, PANELS):
        vals = [getattr(r, field) for r in rows]
        ax.bar(solvers, vals)
        ax.set_ylabel(label)
        if scale == "log" and all(v > 0 for v in vals if np.isfinite(v)):
            ax.set_yscale("log")
        ax.tick_params(axis="x", rotation=30)
        ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_image_grid(dump_dir, solvers, path, limit: int = 8) -> Path:
    """Grid of original / reconstruction / support-mask rows assembled
    from the PGM dumps of an image-recovery run."""
    dump_dir = Path(dump_dir)
    path = Path(path)
    originals = sorted(dump_dir.glob("img*_original.pgm"))[:limit]
    if not originals:
        raise FileNotFoundError(f"no PGM dumps under {dump_dir}")
    n = len(originals)
    nrows = 1 + 2 * len(solvers)
    fig, axes = plt.subplots(nrows, n, figsize=(1.2 * n, 1.2 * nrows),
                             squeeze=False)
    for col, orig in enumerate(originals):
        stem = orig.name.replace("_original.pgm", "")
        axes[0][col].imshow(read_pgm(orig).reshape(SIDE, SIDE),
                            cmap="gray", vmin=0, vmax=255)
        for s, solver in enumerate(solvers):
            rec = dump_dir / f"{stem}_{solver}.pgm"
            mask = dump_dir / f"{stem}_{solver}_support.pgm"
            if rec.exists():
                axes[1 + 2 * s][col].imshow(read_pgm(rec), cmap="gray",
                                            vmin=0, vmax=255)
            if mask.exists():
                axes[2 + 2 * s][col].imshow(read_pgm(mask), cmap="gray",
                                            vmin=0, vmax=255)
    labels = ["original"]
    for solver in solvers:
        labels += [solver, f"{solver} support"]
    for r, label in enumerate(labels):
        axes[r][0].set_ylabel(label, fontsize=8)
    for ax_row in axes:
        for ax in ax_row:
            ax.set_xticks([])
            ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
