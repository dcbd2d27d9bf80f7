"""Acceptance suite: every exit criterion at its stated tolerance, one
pass/fail line printed per criterion (run with `pytest -s` to see them)."""

import time
from itertools import combinations
from pathlib import Path

import numpy as np

from ampursuit.baselines import brute_force
from ampursuit.bench import (
    SynthSpec,
    default_enet_weights,
    gen_problem,
    run_image_recovery,
    run_table,
)
from ampursuit.baselines import fista_enet, nnomp
from ampursuit.cholesky import chol_full, chol_insert, chol_remove
from ampursuit.datasets import (
    BadMagic,
    TruncatedFile,
    read_idx,
    read_pgm,
    synthetic_sparse_images,
    write_idx_images,
)
from ampursuit.model import (
    PriorParams,
    SparseProblem,
    Support,
    normalize_columns,
    rho_from_prior,
    support_cost,
)
from ampursuit.solver import (
    TERM_CONVERGED,
    AmpConfig,
    AmpState,
    amp,
    insertion_bound,
    removal_bound,
)

DATA = Path(__file__).parent / "data"


def _report(num: int, name: str, ok: bool, detail: str = ""):
    tail = f" ({detail})" if detail else ""
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {num}: {name}{tail}")
    assert ok, f"criterion {num} failed: {name}{tail}"


def test_criterion_1_cholesky_maintenance():
    lam = 0.1
    t0 = time.perf_counter()
    worst = 0.0
    for s in range(200):
        rng = np.random.default_rng([9000, s])
        A = rng.standard_normal((96, 128))
        A /= np.linalg.norm(A, axis=0)
        # half the walks start from a directly factored nonempty set
        start = int(rng.integers(0, 24)) if s % 2 else 0
        active: list[int] = list(rng.choice(128, size=start, replace=False))
        sub = A[:, active]
        L = chol_full(sub.T @ sub + lam * np.eye(start))
        for _ in range(50):
            grow = len(active) < 64 and (len(active) == 0 or rng.random() < 0.6)
            if grow:
                cand = int(rng.integers(0, 128))
                while cand in active:
                    cand = int(rng.integers(0, 128))
                g = A[:, active].T @ A[:, cand] if active else np.zeros(0)
                L = chol_insert(L, g, 1 + lam)
                active.append(cand)
            else:
                pos = int(rng.integers(len(active)))
                L = chol_remove(L, pos)
                del active[pos]
            sub = A[:, active]
            ref = chol_full(sub.T @ sub + lam * np.eye(len(active)))
            if active:
                worst = max(worst, float(np.max(np.abs(L.L - ref.L))))
    elapsed = time.perf_counter() - t0
    _report(1, "incremental factor matches refactorization",
            worst <= 1e-8 and elapsed < 5.0,
            f"200 sequences, worst err {worst:.2e}, {elapsed:.2f}s")


def test_criterion_2_bound_inequalities():
    t0 = time.perf_counter()
    violations = 0
    checked = 0
    for inst in range(200):
        rng = np.random.default_rng([777, inst])
        p = int(rng.integers(6, 13))
        q = int(rng.integers(4, p + 1))
        A, _ = normalize_columns(rng.standard_normal((q, p)))
        y = rng.standard_normal(q)
        lam = float(rng.uniform(1e-4, 0.1))
        rho = rng.uniform(-0.05, 0.15, size=p)
        prob = SparseProblem(A=A, y=y, lam=lam, rho=rho)
        gcache: dict[tuple, float] = {}

        def g(idx):
            if idx not in gcache:
                gcache[idx] = support_cost(prob, list(idx))[0]
            return gcache[idx]

        for size in range(4):
            for idx in combinations(range(p), size):
                gS = g(idx)
                sub = prob.A[:, list(idx)]
                gram = sub.T @ sub + lam * np.eye(size)
                xS = np.linalg.solve(gram, sub.T @ y) if size else np.zeros(0)
                r = y - sub @ xS if size else y.copy()
                state = AmpState(S=Support(p, idx), L=chol_full(gram),
                                 xS=xS, r=r, cost=gS)
                u_val, _ = insertion_bound(state, prob)
                v_val, _ = removal_bound(state, prob)
                exact_u = min((g(tuple(sorted(idx + (i,)))) - gS
                               for i in range(p) if i not in idx),
                              default=np.inf)
                exact_v = min((g(tuple(t for t in idx if t != j)) - gS
                               for j in idx), default=np.inf)
                slack = 1e-9 * (1 + abs(gS))  # roundoff guard only
                checked += 1
                violations += u_val < exact_u - slack
                violations += v_val < exact_v - slack
    elapsed = time.perf_counter() - t0
    _report(2, "insertion/removal bounds dominate exact changes",
            violations == 0 and elapsed < 30.0,
            f"{checked} supports over 200 instances, "
            f"{violations} violations, {elapsed:.1f}s")


def test_criterion_3_descent_and_termination():
    converged = 0
    monotone = True
    no_revisit = True
    for t in range(100):
        prob, _ = gen_problem(SynthSpec(p=512, q=256, k=100, sigma=0.01,
                                        seed=[505, t]))
        rep = amp(prob, AmpConfig(track_supports=True))
        trace = rep.cost_trace
        monotone &= all(b < a for a, b in zip(trace, trace[1:]))
        seen = [frozenset(s) for s in rep.support_trace]
        no_revisit &= len(set(seen)) == len(seen)
        converged += rep.termination == TERM_CONVERGED
    _report(3, "strict descent, no revisits, termination before the cap",
            monotone and no_revisit and converged >= 99,
            f"monotone={monotone}, no_revisit={no_revisit}, "
            f"converged {converged}/100")


def test_criterion_4_global_optimality_sanity():
    exact = 0
    violations = 0
    gaps = []
    for t in range(100):
        k = 1 + t % 3
        prob, _ = gen_problem(SynthSpec(p=10, q=6, k=k, sigma=0.01,
                                        seed=[404, t]))
        a = amp(prob).solution.cost
        b = brute_force(prob).cost
        tol = 1e-9 * (1 + abs(b))
        violations += a < b - tol
        exact += abs(a - b) <= tol
        gaps.append(max((a - b) / (1 + abs(b)), 0.0))
    _report(4, "exhaustive oracle lower-bounds the pursuit",
            violations == 0 and exact >= 70,
            f"exact optimum {exact}/100, median rel gap "
            f"{np.median(gaps):.3g}, max {max(gaps):.3g}")


def test_criterion_5_benchmark_trends():
    spec = SynthSpec(p=512, q=256, k=100, sigma=0.01, seed=31)
    result = run_table(spec, trials=20, solvers=["amp", "omp", "fista"])
    agg = {row.solver: row for row in result.aggregates}
    amp_rows = [r for r in result.trials if r.solver == "amp"]
    slowest = max(r.time_s for r in amp_rows)
    ok = (
        agg["amp"].sm >= 95.0
        and agg["amp"].mse < agg["fista"].mse
        and agg["amp"].mse < agg["omp"].mse
        and agg["amp"].cost < agg["fista"].cost
        and slowest < 5.0
    )
    _report(5, "benchmark-regime trends over 20 trials", ok,
            f"amp sm={agg['amp'].sm:.2f}%, mse {agg['amp'].mse:.2e} vs "
            f"fista {agg['fista'].mse:.2e} / omp {agg['omp'].mse:.2e}, "
            f"cost {agg['amp'].cost:.3f} vs fista {agg['fista'].cost:.3f}, "
            f"slowest amp solve {slowest:.2f}s")


def test_criterion_6_nonneg_sweep_trends():
    k_values = list(range(10, 121, 10))
    trials = 10
    amp_wins = 0
    min_amp_coeff = 0.0
    min_nnomp_coeff = 0.0
    for k in k_values:
        amp_costs, fista_costs = [], []
        for t in range(trials):
            prob, _ = gen_problem(SynthSpec(p=512, q=256, k=k, sigma=0.01,
                                            seed=[606, k, t], nonneg=True))
            rep = amp(prob)
            amp_costs.append(rep.solution.cost)
            min_amp_coeff = min(min_amp_coeff, float(rep.solution.x.min()))
            sol_nn = nnomp(prob, k)
            min_nnomp_coeff = min(min_nnomp_coeff, float(sol_nn.x.min()))
            w1, w2 = default_enet_weights(prob)
            fista_costs.append(fista_enet(prob, w1, w2).cost)
        amp_wins += np.mean(amp_costs) <= np.mean(fista_costs)
    ok = (
        amp_wins >= int(np.ceil(0.9 * len(k_values)))
        and min_amp_coeff >= -1e-12
        and min_nnomp_coeff >= -1e-12
    )
    _report(6, "nonnegative sweep trends", ok,
            f"amp cost <= fista cost at {amp_wins}/{len(k_values)} points, "
            f"min coeffs amp {min_amp_coeff:.1e} / nnomp {min_nnomp_coeff:.1e}")


def test_criterion_7_image_recovery(tmp_path):
    images = synthetic_sparse_images(20, seed=71)
    result = run_image_recovery(images, q=350, sigma=0.03,
                                solvers=["amp", "fista"], seed=71,
                                dump_dir=tmp_path)
    agg = {row.solver: row for row in result.aggregates}
    dumps_ok = True
    for i in range(20):
        raw = read_pgm(tmp_path / f"img{i:03d}_original.pgm")
        expected = np.clip(np.rint(images[i] * 255), 0, 255).astype(np.uint8)
        dumps_ok &= bool(np.array_equal(raw.ravel(), expected))
        dumps_ok &= (tmp_path / f"img{i:03d}_amp.pgm").exists()
        dumps_ok &= (tmp_path / f"img{i:03d}_amp_support.pgm").exists()
    ok = (
        agg["amp"].sm > agg["fista"].sm
        and agg["amp"].mse < agg["fista"].mse
        and dumps_ok
    )
    _report(7, "image recovery trends and lossless dumps", ok,
            f"amp sm={agg['amp'].sm:.2f} vs fista {agg['fista'].sm:.2f}, "
            f"amp mse={agg['amp'].mse:.2e} vs fista {agg['fista'].mse:.2e}, "
            f"dumps_ok={dumps_ok}")


def test_criterion_8_penalty_formula():
    zero = rho_from_prior(PriorParams(sigma=1.0, kappa=np.array([0.5]),
                                      lam=2 * np.pi))[0]
    grid = np.linspace(0.005, 0.995, 100)
    rho = rho_from_prior(PriorParams(sigma=0.8, kappa=grid, lam=0.7))
    ok = abs(zero) <= 1e-12 and bool(np.all(np.diff(rho) < 0))
    _report(8, "penalty formula zero case and monotonicity", ok,
            f"zero case {zero:.2e}, strictly decreasing on 100-point grid")


def test_criterion_9_idx_parser(tmp_path):
    golden = DATA / "golden-images-idx3-ubyte"
    images = read_idx(golden)
    rewritten = tmp_path / "rewritten"
    write_idx_images(rewritten, images)
    byte_exact = rewritten.read_bytes() == golden.read_bytes()

    bad = tmp_path / "bad"
    bad.write_bytes(bytes.fromhex("DEADBEEF") + b"\0" * 64)
    try:
        read_idx(bad)
        bad_ok = False
    except BadMagic:
        bad_ok = True

    short = tmp_path / "short"
    short.write_bytes(golden.read_bytes()[:-17])
    try:
        read_idx(short)
        trunc_ok = False
    except TruncatedFile:
        trunc_ok = True

    ok = byte_exact and bad_ok and trunc_ok
    _report(9, "idx parser golden fixture and error paths", ok,
            f"byte_exact={byte_exact}, bad_magic={bad_ok}, truncated={trunc_ok}")
