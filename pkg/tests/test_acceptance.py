"""Acceptance suite: one test per shipped guarantee.

Every test reports a single pass/fail line through the shared registry
(replayed after the run by the conftest hook) and asserts on it, so the
suite both documents and enforces the guarantees.  Optimizer traces
produced along the way are collected for the monotone-descent check,
which is therefore defined last in the file.

Criterion tolerances and budgets are stated inline; engine settings that
needed empirical tuning (the benchmark and simulation configurations)
are frozen as constants below.
"""

import math
import time
from dataclasses import replace

import numpy as np
from numpy.linalg import eigvalsh

from _acceptance_report import register_run, report
from corrsearch.benchmarks import BenchmarkSpec, bench_pullback
from corrsearch.corrspace import (
    CASE_FINAL,
    CASE_INTERIOR,
    CASE_LEADING,
    CASE_ROW2,
    angles_to_corr,
    corr_to_angles,
    num_angles,
    random_angles,
    random_corr,
    wrap_angles,
    wrap_scalar,
)
from corrsearch.datagen import TruthSpec, compute_metrics, gen_truth, sample_mvn
from corrsearch.estimate import estimate
from corrsearch.objective import LossSpec, ObjectiveSpec
from corrsearch.penalty import PenaltySpec, penalty_derivative, penalty_value
from corrsearch.search import OptimizerConfig, optimize, stationarity_check

# Benchmark engine settings (criterion 4).  Grid restarts are essential:
# warm restarts re-polish the same basin, while the lattice draws recover
# the global one.  Tuned so the worst d=5 replication stays well inside
# the 60 s budget.
BENCH_CONFIG = OptimizerConfig(
    restart="grid",
    max_run=3,
    max_iter=10000,
    kappa=1e-9,
    tau1=1e-12,
    tau2=0.0,
)

# Simulation-study settings (criterion 9).  The support threshold sits a
# bit under the n = 50 noise scale (1/sqrt(n) is about 0.14); the coarse
# kappa and iteration cap keep one replication near a minute, which is all
# the classification at that threshold needs.
SIM_CONFIG = OptimizerConfig(max_run=1, max_iter=800, kappa=1e-3, cache_objective=True)
SIM_LAMBDA_GRID = (0.15, 0.3)
SIM_ZERO_TOL = 0.08
SIM_SEED = 9


def gram_target(rng, d, cols):
    """Random correlation matrix with generic (sign-mixed) entries."""
    A = rng.standard_normal((d, cols))
    S = A @ A.T
    w = 1.0 / np.sqrt(np.diag(S))
    G = S * np.outer(w, w)
    np.fill_diagonal(G, 1.0)
    return G


# ---------------------------------------------------------------------------
# 1. parameterization round trip


def test_criterion_1_round_trip():
    rng = np.random.default_rng(1001)
    t0 = time.perf_counter()
    worst = 0.0
    for d in (2, 3, 5, 10, 20):
        for _ in range(100):
            C = random_corr(d, rng)
            back = angles_to_corr(corr_to_angles(C))
            worst = max(worst, float(np.max(np.abs(back - C))))
    secs = time.perf_counter() - t0
    ok = worst < 1e-10 and secs < 5.0
    assert report(
        1, ok,
        "round trip over d in {2,3,5,10,20}: max error %.2e (tol 1e-10), %.2f s (budget 5 s)"
        % (worst, secs),
    )


# ---------------------------------------------------------------------------
# 2. feasibility of wrapped arbitrary vectors


def test_criterion_2_wrapped_feasibility():
    rng = np.random.default_rng(1002)
    t0 = time.perf_counter()
    exact = True
    min_eig = np.inf
    for d in (3, 5, 10):
        for _ in range(1000):
            phi = rng.normal(scale=7.0, size=num_angles(d))
            C = angles_to_corr(wrap_angles(phi, d))
            exact = exact and bool(np.all(np.diag(C) == 1.0)) and np.array_equal(C, C.T)
            min_eig = min(min_eig, float(eigvalsh(C)[0]))
    secs = time.perf_counter() - t0
    ok = exact and min_eig >= -1e-12 and secs < 10.0
    assert report(
        2, ok,
        "3000 wrapped draws: exact diag/symmetry %s, min eigenvalue %.2e (floor -1e-12), %.2f s (budget 10 s)"
        % (exact, min_eig, secs),
    )


# ---------------------------------------------------------------------------
# 3. wrap laws


def test_criterion_3_wrap_laws():
    rng = np.random.default_rng(1003)
    cases = (
        (CASE_ROW2, math.pi),
        (CASE_LEADING, math.pi),
        (CASE_INTERIOR, 2.0 * math.pi),
        (CASE_FINAL, 2.0 * math.pi),
    )
    worst_idem = 0.0
    worst_period = 0.0
    for code, period in cases:
        xs = rng.uniform(-30.0, 30.0, size=10_000)
        for x in xs:
            w = wrap_scalar(float(x), code)
            worst_idem = max(worst_idem, abs(wrap_scalar(w, code) - w))
            worst_period = max(worst_period, abs(wrap_scalar(float(x) + period, code) - w))
    ok = worst_idem < 1e-12 and worst_period < 1e-12
    assert report(
        3, ok,
        "10^4 points per case: idempotence gap %.2e, periodicity gap %.2e (tol 1e-12)"
        % (worst_idem, worst_period),
    )


# ---------------------------------------------------------------------------
# 4. benchmark reproduction


def _bench_sweep(name, d, reps=10, config=BENCH_CONFIG):
    """Best-of-reps random-start runs; returns (best, values, max seconds)."""
    spec = BenchmarkSpec(name, d)
    pull = bench_pullback(spec)
    values = []
    seconds = []
    for rep in range(reps):
        ss = np.random.SeedSequence([4000 + d, rep])
        rng = np.random.default_rng(ss)
        init = angles_to_corr(random_angles(d, rng))
        cfg = replace(config, seed=int(ss.generate_state(1)[0]))
        t0 = time.perf_counter()
        res = optimize(pull, init, cfg)
        seconds.append(time.perf_counter() - t0)
        values.append(res.best_value)
        register_run("%s d=%d rep %d" % (name, d, rep), res.trace)
    return min(values), values, max(seconds)


def test_criterion_4_benchmarks():
    parts = []
    ok = True

    for name, gate in (("ackley", 1e-8), ("griewank", 1e-8), ("rastrigin", 2.0)):
        best, _, max_s = _bench_sweep(name, 5)
        ok = ok and best <= gate and max_s <= 60.0
        parts.append("%s5 %.1e/%.0fs" % (name[:4], best, max_s))

    rosen_best, _, rosen_s = _bench_sweep("rosenbrock", 5)
    parts.append("rose5 %.3g/%.0fs (reported, not gated)" % (rosen_best, rosen_s))

    for name in ("ackley", "griewank"):
        best, _, max_s = _bench_sweep(name, 10)
        ok = ok and best <= 1e-8 and max_s <= 600.0
        parts.append("%s10 %.1e/%.0fs" % (name[:4], best, max_s))

    assert report(
        4, ok,
        "best-of-10 (gates 1e-8; rastrigin 2.0; budgets 60 s/rep d=5, 600 s/rep d=10): "
        + "  ".join(parts),
    )


# ---------------------------------------------------------------------------
# 5. convex recovery


def test_criterion_5_convex_recovery():
    rng = np.random.default_rng(1005)
    target = gram_target(rng, 5, 10)
    spec = ObjectiveSpec(LossSpec("frobenius", target=target))
    cfg = OptimizerConfig(restart="grid", max_run=12, kappa=1e-7, tau2=0.0, seed=1005)
    t0 = time.perf_counter()
    res = optimize(spec, np.eye(5), cfg)
    secs = time.perf_counter() - t0
    register_run("convex recovery", res.trace)
    err = float(np.max(np.abs(res.best_corr - target)))
    stat = stationarity_check(spec, wrap_angles(res.best_phi, 5))
    ok = err < 1e-4 and stat <= 1e-3 and secs < 30.0
    assert report(
        5, ok,
        "unpenalized Frobenius fit to random target: entry error %.2e (tol 1e-4), "
        "stationarity %.2e (tol 1e-3), %.1f s (budget 30 s)" % (err, stat, secs),
    )


# ---------------------------------------------------------------------------
# 7. determinism across worker counts


def test_criterion_7_parallel_determinism():
    rng = np.random.default_rng(1007)
    target = gram_target(rng, 4, 8)
    spec = ObjectiveSpec(LossSpec("frobenius", target=target))
    base = OptimizerConfig(restart="grid", max_run=3, max_iter=400, kappa=1e-8, tau2=0.0, seed=7)
    serial = optimize(spec, np.eye(4), base)
    threaded = optimize(spec, np.eye(4), replace(base, parallelism=8))
    register_run("determinism p=1", serial.trace)
    register_run("determinism p=8", threaded.trace)
    identical = (
        serial.trace == threaded.trace
        and np.array_equal(serial.best_phi, threaded.best_phi)
        and serial.best_value == threaded.best_value
    )
    assert report(
        7, identical,
        "parallelism 1 vs 8: traces %s (%d rows), best values %.17g / %.17g"
        % ("identical" if identical else "DIFFER", len(serial.trace),
           serial.best_value, threaded.best_value),
    )


# ---------------------------------------------------------------------------
# 8. step-halving rate bound


def test_criterion_8_shrink_rate_bound():
    target = np.array([[1.0, 0.5, 0.3], [0.5, 1.0, 0.4], [0.3, 0.4, 1.0]])
    spec = ObjectiveSpec(LossSpec("frobenius", target=target))
    cfg = OptimizerConfig(
        strict_failure_shrink=True, max_run=1, max_iter=8000, kappa=1e-9, seed=8
    )
    res = optimize(spec, np.eye(3), cfg)
    register_run("rate bound", res.trace)

    # the target is itself a correlation matrix, so the optimal value is 0
    gaps = []
    rows = res.trace
    for i in range(1, len(rows)):
        if rows[i][2] < rows[i - 1][2]:
            gaps.append(rows[i - 1][3])

    enough = len(gaps) >= 20
    ok = enough
    detail = "only %d step reductions observed" % len(gaps)
    if enough:
        fitted = max(gaps[r] * (r + 2) for r in range(3))  # reductions r = 1, 2, 3
        worst_ratio = 0.0
        for r in range(20):
            product = gaps[r] * (r + 2)
            worst_ratio = max(worst_ratio, product / fitted)
        ok = worst_ratio <= 1.0 + 1e-9
        detail = (
            "gap x (r+1) for r <= 20 within %.3f of the constant fitted "
            "from the first three reductions (%d reductions seen)"
            % (worst_ratio, len(gaps))
        )
    assert report(8, ok, detail)


# ---------------------------------------------------------------------------
# 9. simulation band


def test_criterion_9_simulation_band():
    t0 = time.perf_counter()
    tprs, mccs = [], []
    for rep in range(10):
        truth_rng = np.random.default_rng(np.random.SeedSequence([SIM_SEED, rep, 0]))
        truth, truth_support = gen_truth(TruthSpec("block-random5", 20), truth_rng)
        X = sample_mvn(truth, 50, np.random.SeedSequence([SIM_SEED, rep, 1]))
        res = estimate(
            X,
            loss="gaussian",
            penalty_family="scad",
            lambda_grid=SIM_LAMBDA_GRID,
            config=SIM_CONFIG,
            zero_tol=SIM_ZERO_TOL,
        )
        m = compute_metrics(truth, truth_support, res.gamma_hat, res.support)
        tprs.append(m.tpr)
        mccs.append(m.mcc)
        register_run("simulation rep %d" % rep, res.optimizer.trace)
    secs = time.perf_counter() - t0
    mean_tpr = float(np.mean(tprs))
    mean_mcc = float(np.mean(mccs))
    ok = 0.60 <= mean_tpr <= 0.95 and mean_mcc >= 0.30 and secs <= 1800.0
    assert report(
        9, ok,
        "block design d=20 n=50, SCAD grid %s, 10 reps: mean TPR %.3f (band [0.60, 0.95]), "
        "mean MCC %.3f (floor 0.30), %.1f min (budget 30 min)"
        % (list(SIM_LAMBDA_GRID), mean_tpr, mean_mcc, secs / 60.0),
    )


# ---------------------------------------------------------------------------
# 10. penalty derivatives


def test_criterion_10_penalty_derivatives():
    rng = np.random.default_rng(1010)
    h = 1e-6
    specs = [
        (PenaltySpec("scad", lam=0.3), (0.3, 3.7 * 0.3), 2.0 * 3.7 * 0.3),
        (PenaltySpec("mcp", lam=0.25), (3.0 * 0.25,), 2.0 * 3.0 * 0.25),
    ]
    worst = 0.0
    plateaus_exact = True
    for spec, kinks, hi in specs:
        pts = []
        while len(pts) < 1000:
            t = float(rng.uniform(3 * h, hi))
            if all(abs(t - kink) > 1e-3 for kink in kinks):
                pts.append(t)
        for t in pts:
            fd = (penalty_value(spec, t + h) - penalty_value(spec, t - h)) / (2.0 * h)
            worst = max(worst, abs(penalty_derivative(spec, t) - fd))
        # constancy beyond the outermost kink, compared exactly
        edge = kinks[-1]
        vals = [penalty_value(spec, edge + u) for u in (1e-9, 0.5, 3.0, 50.0)]
        plateaus_exact = plateaus_exact and all(v == vals[0] for v in vals)
    ok = worst < 1e-6 and plateaus_exact
    assert report(
        10, ok,
        "SCAD/MCP derivative vs central differences at 10^3 points each: "
        "max gap %.2e (tol 1e-6); plateaus exactly constant: %s" % (worst, plateaus_exact),
    )


# ---------------------------------------------------------------------------
# 11. generator fidelity


def test_criterion_11_generator_fidelity():
    exact = True

    M, _ = gen_truth(TruthSpec("toeplitz", 12))
    idx = np.arange(12)
    exact = exact and np.array_equal(M, 0.75 ** np.abs(idx[:, None] - idx[None, :]))

    M, _ = gen_truth(TruthSpec("banded", 15))
    gap = np.abs(np.arange(15)[:, None] - np.arange(15)[None, :])
    exact = exact and np.array_equal(M, np.where(gap <= 10, 1.0 - gap / 10.0, 0.0))

    M, _ = gen_truth(TruthSpec("block-fixed", 20))
    blk = np.repeat(np.arange(2), 10)
    want = np.where(blk[:, None] == blk[None, :], 0.8, 0.0)
    np.fill_diagonal(want, 1.0)
    exact = exact and np.array_equal(M, want)

    counts_ok = True
    for d, sparsity in ((10, 0.8), (8, 0.5), (12, 0.95)):
        _, sup = gen_truth(TruthSpec("uniform-sparse", d, sparsity=sparsity, seed=3))
        pairs = d * (d - 1) // 2
        counts_ok = counts_ok and int(sup.sum()) // 2 == round((1 - sparsity) * pairs)

    min_eig = np.inf
    for design in ("block-random5", "uniform-sparse", "block-fixed", "toeplitz", "banded"):
        d = {"block-random5": 10, "block-fixed": 20}.get(design, 12)
        M, _ = gen_truth(TruthSpec(design, d, sparsity=0.7, seed=5))
        min_eig = min(min_eig, float(eigvalsh(M)[0]))

    ok = exact and counts_ok and min_eig > 0.0
    assert report(
        11, ok,
        "closed forms exact %s, sparse counts exact %s, min eigenvalue over designs %.2e"
        % (exact, counts_ok, min_eig),
    )


# ---------------------------------------------------------------------------
# 12. metrics oracle


def test_criterion_12_metrics_oracle():
    rng = np.random.default_rng(1012)
    d = 10
    iu = np.triu_indices(d, 1)
    agree = True
    for _ in range(100):
        sups = []
        for _ in range(2):
            s = np.zeros((d, d), dtype=int)
            s[iu] = rng.integers(0, 2, size=len(iu[0]))
            s += s.T
            sups.append(s)
        rep = compute_metrics(np.eye(d), sups[0], np.eye(d), sups[1])
        tp = fp = fn = tn = 0
        for i in range(d):
            for j in range(i + 1, d):
                t, e = bool(sups[0][i, j]), bool(sups[1][i, j])
                tp += t and e
                fp += (not t) and e
                fn += t and (not e)
                tn += (not t) and (not e)
        tpr = tp / (tp + fn) if tp + fn else 0.0
        fpr = fp / (fp + tn) if fp + tn else 0.0
        den = float(tp + fp) * float(tp + fn) * float(tn + fp) * float(tn + fn)
        mcc = (tp * tn - fp * fn) / math.sqrt(den) if den > 0 else 0.0
        agree = agree and rep.tpr == tpr and rep.fpr == fpr and rep.mcc == mcc
    assert report(
        12, agree,
        "compute_metrics vs brute-force confusion matrix on 100 support pairs at d=10: "
        + ("exact agreement" if agree else "MISMATCH"),
    )


# ---------------------------------------------------------------------------
# 6. monotone descent (checks every trace the suite produced, so it runs last)


def test_criterion_6_monotone_descent():
    from _acceptance_report import RUNS

    assert RUNS, "no optimizer runs were registered by the earlier criteria"
    worst_increase = -np.inf
    rows_checked = 0
    for _label, trace in RUNS:
        best = [row[3] for row in trace]
        rows_checked += len(best)
        for a, b in zip(best, best[1:]):
            worst_increase = max(worst_increase, b - a)
    ok = worst_increase <= 0.0
    assert report(
        6, ok,
        "best-ever trace non-increasing across %d runs (%d rows); largest increase %.1e"
        % (len(RUNS), rows_checked, worst_increase),
    )
