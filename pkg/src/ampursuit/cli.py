"""Command-line front end: single-instance recovery, benchmark tables,
sparsity sweeps, image recovery, and the exhaustive-oracle check.

Data goes to --out (or standard output); diagnostics go to standard
error.  Exit codes: 0 success, 1 solver/runtime failure, 2 usage error.
When --out is given for a table experiment, companion figures are
rendered next to the delimited output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bench import (
    DEFAULT_KAPPA,
    DEFAULT_LAMBDA,
    SynthSpec,
    _child_seed,
    gen_problem,
    metrics,
    run_image_recovery,
    run_sweep,
    run_table,
    solve_named,
)
from .baselines import brute_force
from .datasets import load_image_set, synthetic_sparse_images
from .solver import amp


def _solver_list(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def _k_range(text: str) -> list[int]:
    """Parse `start:stop:step` (inclusive stop) or a single integer."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(
                f"expected start:stop:step, got {text!r}")
        start, stop, step = (int(p) for p in parts)
        if step <= 0 or stop < start:
            raise argparse.ArgumentTypeError(f"bad range {text!r}")
        return list(range(start, stop + 1, step))
    return [int(text)]


def _add_problem_flags(sp, p=512, q=256, k=100, sigma=0.01):
    sp.add_argument("--p", type=int, default=p, help="signal length")
    sp.add_argument("--q", type=int, default=q, help="number of measurements")
    if k is not None:
        sp.add_argument("--k", type=int, default=k, help="planted nonzeros")
    sp.add_argument("--sigma", type=float, default=sigma, help="noise std")
    _add_model_flags(sp)


def _add_model_flags(sp):
    sp.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA,
                    help="ridge weight in the objective")
    sp.add_argument("--kappa", type=float, default=DEFAULT_KAPPA,
                    help="prior activation probability for the penalty policy")
    sp.add_argument("--rho", type=float, default=None,
                    help="uniform activation penalty (overrides the policy)")
    sp.add_argument("--seed", type=int, default=0, help="base seed")
    sp.add_argument("--nonneg", action="store_true",
                    help="nonnegative recovery mode")
    sp.add_argument("--threads", type=int, default=1,
                    help="trial-level parallelism (1 keeps timing rows clean)")
    sp.add_argument("--out", type=Path, default=None, help="output file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ampursuit",
        description="Sparse recovery by adaptive matching pursuit, "
                    "with baselines and benchmark harnesses.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("recover", help="solve one seeded synthetic instance",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_problem_flags(sp)
    sp.add_argument("--solvers", type=_solver_list, default=["amp"],
                    help="comma-separated solver names")
    sp.set_defaults(func=cmd_recover)

    sp = sub.add_parser("bench", help="aggregate comparison table over trials",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_problem_flags(sp)
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--solvers", type=_solver_list,
                    default=["amp", "omp", "cosamp", "fista"])
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("sweep", help="metrics versus sparsity level",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sp.add_argument("--p", type=int, default=512)
    sp.add_argument("--q", type=int, default=256)
    sp.add_argument("--k", type=_k_range, default=list(range(10, 121, 10)),
                    help="sparsity range start:stop:step")
    sp.add_argument("--sigma", type=float, default=0.01)
    _add_model_flags(sp)
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--solvers", type=_solver_list,
                    default=["amp", "nnomp", "fista"])
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("image", help="recover 28x28 images from projections",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sp.add_argument("--idx-images", type=Path, default=None,
                    help="IDX image file (synthetic strokes if omitted)")
    sp.add_argument("--idx-limit", type=int, default=20,
                    help="number of images to recover")
    sp.add_argument("--measurements", type=int, default=350,
                    help="number of random projections per image")
    sp.add_argument("--sigma", type=float, default=0.03)
    _add_model_flags(sp)
    sp.add_argument("--solvers", type=_solver_list, default=["amp", "fista"])
    sp.set_defaults(func=cmd_image)

    sp = sub.add_parser("oracle-check",
                        help="adaptive solver versus exhaustive enumeration",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_problem_flags(sp, p=10, q=6, k=3, sigma=0.01)
    sp.add_argument("--trials", type=int, default=100)
    sp.set_defaults(func=cmd_oracle_check)
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
        print(f"wrote {out}", file=sys.stderr)


def _render_figures(result, out: Path, kind: str, solvers=None) -> None:
    from . import plots  # deferred: matplotlib import is slow

    stem = out.with_suffix("")
    if kind == "sweep":
        fig = plots.save_sweep_figure(result, f"{stem}_sweep.png")
    elif kind == "image":
        fig = plots.save_image_grid(f"{stem}_images", solvers,
                                    f"{stem}_grid.png")
    else:
        fig = plots.save_bench_figure(result, f"{stem}_metrics.png")
    print(f"wrote {fig}", file=sys.stderr)


def cmd_recover(args) -> int:
    spec = SynthSpec(p=args.p, q=args.q, k=args.k, sigma=args.sigma,
                     seed=args.seed, nonneg=args.nonneg)
    prob, x0 = gen_problem(spec, lam=args.lam, kappa=args.kappa, rho=args.rho)
    payload = {"p": args.p, "q": args.q, "k": args.k, "sigma": args.sigma,
               "seed": args.seed, "nonneg": args.nonneg, "results": {}}
    for name in args.solvers:
        if name == "amp":
            report = amp(prob)
            entry = report.to_dict()
            sol = report.solution
        else:
            sol = solve_named(name, prob, args.k)
            entry = {"x": sol.x.tolist(),
                     "gamma": sol.gamma.astype(int).tolist(),
                     "cost": sol.cost}
        entry.update(metrics(sol, x0, prob))
        payload["results"][name] = entry
        print(f"{name}: cost={entry['cost']:.6g} mse={entry['mse']:.3g} "
              f"sm={entry['sm']:.2f}%", file=sys.stderr)
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def cmd_bench(args) -> int:
    spec = SynthSpec(p=args.p, q=args.q, k=args.k, sigma=args.sigma,
                     seed=args.seed, nonneg=args.nonneg)
    result = run_table(spec, args.trials, args.solvers, lam=args.lam,
                       kappa=args.kappa, rho=args.rho, threads=args.threads)
    if args.out is None:
        result.write_csv(sys.stdout)
    else:
        result.write_csv(args.out)
        print(f"wrote {args.out}", file=sys.stderr)
        _render_figures(result, args.out, "bench")
    return 0


def cmd_sweep(args) -> int:
    spec = SynthSpec(p=args.p, q=args.q, sigma=args.sigma, seed=args.seed,
                     nonneg=args.nonneg)
    result = run_sweep(spec, args.k, args.solvers, trials=args.trials,
                       lam=args.lam, kappa=args.kappa, rho=args.rho,
                       threads=args.threads)
    if args.out is None:
        result.write_csv(sys.stdout)
    else:
        result.write_csv(args.out)
        print(f"wrote {args.out}", file=sys.stderr)
        _render_figures(result, args.out, "sweep")
    return 0


def cmd_image(args) -> int:
    if args.idx_images is not None:
        images = load_image_set(args.idx_images, limit=args.idx_limit).images
    else:
        images = synthetic_sparse_images(args.idx_limit, seed=args.seed)
    dump_dir = None
    if args.out is not None:
        dump_dir = Path(f"{args.out.with_suffix('')}_images")
    result = run_image_recovery(images, q=args.measurements, sigma=args.sigma,
                                solvers=args.solvers, lam=args.lam,
                                kappa=args.kappa, rho=args.rho,
                                seed=args.seed, dump_dir=dump_dir,
                                threads=args.threads)
    if args.out is None:
        result.write_csv(sys.stdout)
    else:
        result.write_csv(args.out)
        print(f"wrote {args.out} and PGM dumps under {dump_dir}",
              file=sys.stderr)
        _render_figures(result, args.out, "image", args.solvers)
    return 0


def cmd_oracle_check(args) -> int:
    gaps = []
    exact = 0
    violations = 0
    for t in range(args.trials):
        k = 1 + t % max(args.k, 1)
        spec = SynthSpec(p=args.p, q=args.q, k=k, sigma=args.sigma,
                         seed=_child_seed(args.seed, 404, t),
                         nonneg=args.nonneg)
        prob, _ = gen_problem(spec, lam=args.lam, kappa=args.kappa,
                              rho=args.rho)
        amp_cost = amp(prob).solution.cost
        opt_cost = brute_force(prob).cost
        tol = 1e-9 * (1.0 + abs(opt_cost))
        rel_gap = (amp_cost - opt_cost) / (1.0 + abs(opt_cost))
        gaps.append(max(rel_gap, 0.0))
        if amp_cost < opt_cost - tol:
            violations += 1
        if abs(amp_cost - opt_cost) <= tol:
            exact += 1
    print(f"trials={args.trials} exact-optimum={exact} "
          f"({100.0 * exact / args.trials:.1f}%) "
          f"median-rel-gap={np.median(gaps):.3g} "
          f"oracle-violations={violations}", file=sys.stderr)
    if args.out is not None:
        payload = {"trials": args.trials, "exact": exact,
                   "median_rel_gap": float(np.median(gaps)),
                   "violations": violations}
        args.out.write_text(json.dumps(payload, indent=2) + "\n")
    return 0 if violations == 0 else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # solver/runtime failures -> exit code 1
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
