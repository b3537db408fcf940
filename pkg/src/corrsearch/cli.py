"""Command line front end.

Subcommands
-----------
optimize        minimize a penalized loss (or an external command) over
                the correlation matrices of a given dimension
estimate        fit a sparse correlation/covariance estimate to data
simulate        seeded generate/sample/estimate/score replications
benchmark       run a test function from random starting matrices
roundtrip-check validate the angle parameterization on random matrices

Every optimizer setting is a flag mirroring the OptimizerConfig field
name (``--s-initial`` for ``s_initial`` and so on), and the same names
work as ``key = value`` lines in a file passed with ``--config``.
Precedence is flags, then config file, then built-in defaults.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import fileio
from .benchmarks import FUNCTIONS, BenchmarkSpec, run_benchmark
from .corrspace import (
    CorrelationError,
    angles_to_corr,
    corr_to_angles,
    random_angles,
    validate_corr,
    wrap_angles,
)
from .datagen import DESIGNS, simulate
from .estimate import estimate
from .objective import BlackBoxCommand, LossSpec, ObjectiveSpec
from .penalty import PenaltySpec
from .search import OptimizerConfig, optimize

_LOSSES = ("gaussian", "frobenius", "blackbox-cmd")
_PENALTIES = ("none", "l1", "scad", "mcp")


class UsageError(Exception):
    """Bad flag combination or config content; maps to exit code 1."""


# ---------------------------------------------------------------------------
# optimizer flags and the config file


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_seed(text: str):
    lowered = text.strip().lower()
    if lowered in ("none", ""):
        return None
    return int(text)


_OPT_PARSERS = {
    "s_initial": float,
    "rho": float,
    "kappa": float,
    "tau1": float,
    "tau2": float,
    "max_iter": int,
    "max_run": int,
    "restart": str,
    "grid_mesh_initial": float,
    "grid_mesh_divisor": float,
    "grid_offset": float,
    "strict_failure_shrink": _parse_bool,
    "cache_objective": _parse_bool,
    "seed": _parse_seed,
    "parallelism": int,
}


def _add_optimizer_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("optimizer settings")
    sup = argparse.SUPPRESS
    g.add_argument("--s-initial", type=float, default=sup, metavar="S",
                   help="initial poll step size (default 1.0)")
    g.add_argument("--rho", type=float, default=sup, metavar="R",
                   help="step divisor on shrink (default 2.0)")
    g.add_argument("--kappa", type=float, default=sup, metavar="K",
                   help="step-size floor; a run stops at or below it (default 1e-6)")
    g.add_argument("--tau1", type=float, default=sup, metavar="T",
                   help="within-run improvement tolerance (default 1e-8)")
    g.add_argument("--tau2", type=float, default=sup, metavar="T",
                   help="across-run convergence tolerance (default 1e-6)")
    g.add_argument("--max-iter", type=int, default=sup, metavar="N",
                   help="iteration cap per run (default 10000)")
    g.add_argument("--max-run", type=int, default=sup, metavar="N",
                   help="restart cap (default 10)")
    g.add_argument("--restart", choices=("warm", "grid"), default=sup,
                   help="restart mode: warm reuses the best point, grid draws "
                        "from a shrinking lattice (default warm)")
    g.add_argument("--grid-mesh-initial", type=float, default=sup, metavar="M",
                   help="lattice mesh for the first grid restart (default 0.5)")
    g.add_argument("--grid-mesh-divisor", type=float, default=sup, metavar="D",
                   help="mesh divisor per grid restart (default 2.0)")
    g.add_argument("--grid-offset", type=float, default=sup, metavar="O",
                   help="lattice offset for grid restarts (default 0.0)")
    g.add_argument("--strict-failure-shrink", action="store_true", default=sup,
                   help="shrink the step only after a failed poll")
    g.add_argument("--cache-objective", action="store_true", default=sup,
                   help="reuse incumbent values instead of re-evaluating each iteration")
    g.add_argument("--seed", type=int, default=sup, metavar="INT",
                   help="random seed for restarts / replication streams (default 0)")
    g.add_argument("--parallelism", type=int, default=sup, metavar="P",
                   help="worker threads for candidate polls, 0 or 1 = serial (default 0)")
    g.add_argument("--config", metavar="PATH", default=None,
                   help="key = value file of optimizer settings; flags take precedence")


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        name = key.strip().replace("-", "_")
        if name not in _OPT_PARSERS:
            raise UsageError(f"{path}:{lineno}: unknown optimizer setting {key.strip()!r}")
        try:
            values[name] = _OPT_PARSERS[name](value.strip())
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key.strip()!r}: {exc}") from None
    return values


def _optimizer_config(ns: argparse.Namespace, default_seed: int = 0) -> OptimizerConfig:
    """Merge defaults, config file, and explicit flags, in that order."""
    values = {}
    if getattr(ns, "config", None):
        values.update(_read_config_file(ns.config))
    present = vars(ns)
    for name in _OPT_PARSERS:
        if name in present:
            values[name] = present[name]
    try:
        cfg = OptimizerConfig(**values)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cfg.seed is None:
        # Seeded by default so identical invocations write identical artifacts.
        cfg = replace(cfg, seed=default_seed)
    return cfg


# ---------------------------------------------------------------------------
# shared pieces


def _ensure_out(ns: argparse.Namespace) -> str:
    out = getattr(ns, "out", ".") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _parse_lambda_grid(text: str) -> list[float]:
    try:
        grid = [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"--lambda-grid expects comma-separated numbers, got {text!r}") from None
    if not grid:
        raise UsageError("--lambda-grid is empty")
    return grid


def _load_mask(ns: argparse.Namespace):
    if getattr(ns, "mask", None) is None:
        return None
    return fileio.read_matrix_csv(ns.mask)


def _penalty_args(ns: argparse.Namespace) -> tuple[float, list[float] | None]:
    lam = getattr(ns, "lam", None)
    grid_text = getattr(ns, "lambda_grid", None)
    if lam is not None and grid_text is not None:
        raise UsageError("pass either --lambda or --lambda-grid, not both")
    grid = _parse_lambda_grid(grid_text) if grid_text is not None else None
    return (0.0 if lam is None else float(lam)), grid


# ---------------------------------------------------------------------------
# subcommands


def _cmd_optimize(ns: argparse.Namespace) -> int:
    out = _ensure_out(ns)
    cfg = _optimizer_config(ns)
    lam, grid = _penalty_args(ns)
    if grid is not None:
        raise UsageError("--lambda-grid applies to estimate/simulate; optimize takes a single --lambda")
    mask = _load_mask(ns)

    blackbox = None
    if ns.loss == "blackbox-cmd":
        if not ns.blackbox_cmd:
            raise UsageError("--loss blackbox-cmd requires --blackbox-cmd")
        if ns.target is None and ns.dim is None and ns.init is None:
            raise UsageError("black-box optimization needs --dim (or --init) to fix the dimension")
    elif ns.blackbox_cmd:
        raise UsageError("--blackbox-cmd requires --loss blackbox-cmd")
    elif ns.target is None:
        raise UsageError(f"--loss {ns.loss} requires --target")

    if ns.target is not None:
        target = validate_corr(fileio.read_matrix_csv(ns.target))
        d = target.shape[0]
    else:
        target = None
        d = None

    if ns.init is not None:
        init = validate_corr(fileio.read_matrix_csv(ns.init))
        if d is not None and init.shape[0] != d:
            raise UsageError(
                f"--init is {init.shape[0]}x{init.shape[0]} but --target is {d}x{d}"
            )
        d = init.shape[0]
    else:
        if d is None:
            d = int(ns.dim)
        init = np.eye(d)
    if ns.dim is not None and int(ns.dim) != d:
        raise UsageError(f"--dim {ns.dim} conflicts with the {d}x{d} matrices given")

    penalty = PenaltySpec(ns.penalty, lam=lam, shape=ns.penalty_shape, mask=mask)
    t0 = time.perf_counter()
    try:
        if ns.loss == "blackbox-cmd":
            blackbox = BlackBoxCommand(ns.blackbox_cmd)
            spec = ObjectiveSpec(LossSpec("blackbox", callback=blackbox), penalty)
        else:
            spec = ObjectiveSpec(LossSpec(ns.loss, target=target), penalty)
        result = optimize(spec, init, cfg)
    finally:
        if blackbox is not None:
            blackbox.close()
    seconds = time.perf_counter() - t0

    fileio.write_matrix_csv(os.path.join(out, "best_corr.csv"), result.best_corr)
    fileio.write_angles_csv(
        os.path.join(out, "best_angles.csv"), wrap_angles(result.best_phi), d
    )
    fileio.write_trace_csv(os.path.join(out, "trace.csv"), result.trace)
    fileio.write_summary_json(
        os.path.join(out, "summary.json"),
        {
            "command": "optimize",
            "d": d,
            "loss": ns.loss,
            "penalty": ns.penalty,
            "lambda": lam,
            "best_value": result.best_value,
            "evaluations": result.evaluations,
            "runs_completed": result.runs_completed,
            "run_values": list(result.run_values),
            "seconds": seconds,
        },
    )
    print(
        "optimize: best value %.6g, %d evaluations, %.2f s -> %s"
        % (result.best_value, result.evaluations, seconds, out)
    )
    return 0


def _cmd_estimate(ns: argparse.Namespace) -> int:
    out = _ensure_out(ns)
    cfg = _optimizer_config(ns)
    lam, grid = _penalty_args(ns)
    mask = _load_mask(ns)

    X, _names, dropped = fileio.read_data_csv(ns.data)
    if dropped:
        print(f"note: dropped {dropped} incomplete row(s) from {ns.data}", file=sys.stderr)

    loss = ns.loss
    callback = None
    blackbox = None
    t0 = time.perf_counter()
    try:
        if loss == "blackbox-cmd":
            if not ns.blackbox_cmd:
                raise UsageError("--loss blackbox-cmd requires --blackbox-cmd")
            blackbox = BlackBoxCommand(ns.blackbox_cmd)
            callback = blackbox
            loss = "blackbox"
        elif ns.blackbox_cmd:
            raise UsageError("--blackbox-cmd requires --loss blackbox-cmd")
        result = estimate(
            X,
            loss=loss,
            penalty_family=ns.penalty,
            lam=lam,
            lambda_grid=grid,
            shape=ns.penalty_shape,
            mask=mask,
            callback=callback,
            config=cfg,
            zero_tol=ns.zero_tol,
        )
    finally:
        if blackbox is not None:
            blackbox.close()
    seconds = time.perf_counter() - t0

    fileio.write_matrix_csv(os.path.join(out, "gamma_hat.csv"), result.gamma_hat)
    fileio.write_matrix_csv(os.path.join(out, "sigma_hat.csv"), result.sigma_hat)
    fileio.write_support_csv(os.path.join(out, "support.csv"), result.support)
    fileio.write_trace_csv(os.path.join(out, "trace.csv"), result.optimizer.trace)
    edges = int(np.sum(result.support)) // 2
    fileio.write_summary_json(
        os.path.join(out, "summary.json"),
        {
            "command": "estimate",
            "n": int(X.shape[0]),
            "d": int(X.shape[1]),
            "loss": ns.loss,
            "penalty": ns.penalty,
            "lambda_used": result.lambda_used,
            "selection_scores": (
                None
                if result.scores is None
                else {("%g" % k): v for k, v in result.scores.items()}
            ),
            "zero_tol": result.zero_tol,
            "support_edges": edges,
            "dropped_rows": dropped,
            "best_value": result.optimizer.best_value,
            "evaluations": result.optimizer.evaluations,
            "seconds": seconds,
        },
    )
    print(
        "estimate: lambda %g, %d edges, best value %.6g, %d evaluations, %.2f s -> %s"
        % (
            result.lambda_used,
            edges,
            result.optimizer.best_value,
            result.optimizer.evaluations,
            seconds,
            out,
        )
    )
    return 0


_REPLICATION_COLUMNS = (
    "rep", "design", "d", "n", "method", "lambda",
    "tpr", "fpr", "mcc", "rmse", "mad", "frob_err", "spec_err", "seconds",
)


def _cmd_simulate(ns: argparse.Namespace) -> int:
    out = _ensure_out(ns)
    seed = int(vars(ns).get("seed", 0))
    cfg = _optimizer_config(ns, default_seed=seed)
    lam, grid = _penalty_args(ns)
    loss = ns.loss
    if loss == "blackbox-cmd":
        raise UsageError("simulate supports the built-in losses only")

    t0 = time.perf_counter()
    rows, summary = simulate(
        ns.design,
        ns.d,
        ns.n,
        ns.reps,
        loss=loss,
        penalty_family=ns.penalty,
        lam=lam,
        lambda_grid=grid,
        shape=ns.penalty_shape,
        config=cfg,
        zero_tol=ns.zero_tol,
        sparsity=ns.sparsity,
        seed=seed,
        parallelism=ns.sim_parallelism,
    )
    seconds = time.perf_counter() - t0

    fileio.write_rows_csv(os.path.join(out, "replications.csv"), _REPLICATION_COLUMNS, rows)
    fileio.write_summary_json(
        os.path.join(out, "summary.json"),
        {
            "command": "simulate",
            "design": ns.design,
            "d": ns.d,
            "n": ns.n,
            "reps": ns.reps,
            "sparsity": ns.sparsity,
            "method": rows[0]["method"],
            "metrics": {k: {"mean": v[0], "stderr": v[1]} for k, v in summary.items()},
            "seconds": seconds,
        },
    )
    mcc_mean, mcc_se = summary["mcc"]
    total_evals = "-"
    print(
        "simulate: %s d=%d n=%d reps=%d, mean MCC %.3f (se %.3f), %s evaluations, %.2f s -> %s"
        % (ns.design, ns.d, ns.n, ns.reps, mcc_mean, mcc_se, total_evals, seconds, out)
    )
    return 0


def _cmd_benchmark(ns: argparse.Namespace) -> int:
    out = _ensure_out(ns)
    seed = int(vars(ns).get("seed", 0))
    cfg = _optimizer_config(ns, default_seed=seed)
    spec = BenchmarkSpec(ns.fn, ns.d) if ns.scale is None else BenchmarkSpec(ns.fn, ns.d, ns.scale)

    t0 = time.perf_counter()
    result = run_benchmark(spec, reps=ns.reps, config=cfg, seed=seed)
    seconds = time.perf_counter() - t0

    row = {
        "function": spec.name,
        "d": spec.d,
        "reps": ns.reps,
        "min_value": result.best,
        "se_value": result.se_values,
        "mean_seconds": result.mean_seconds,
        "se_seconds": result.se_seconds,
        "mean_evaluations": float(np.mean(result.evaluations)),
    }
    fileio.write_rows_csv(os.path.join(out, "benchmark.csv"), list(row.keys()), [row])
    fileio.write_summary_json(
        os.path.join(out, "summary.json"),
        {
            "command": "benchmark",
            "function": spec.name,
            "d": spec.d,
            "scale": spec.scale,
            "reps": ns.reps,
            "min_value": result.best,
            "se_value": result.se_values,
            "values": result.values,
            "evaluations": result.evaluations,
            "mean_seconds": result.mean_seconds,
            "se_seconds": result.se_seconds,
            "seconds": seconds,
        },
    )
    print(
        "benchmark: %s d=%d reps=%d, min value %.6g, %d evaluations, %.2f s -> %s"
        % (
            spec.name,
            spec.d,
            ns.reps,
            result.best,
            int(np.sum(result.evaluations)),
            seconds,
            out,
        )
    )
    return 0


def _cmd_roundtrip(ns: argparse.Namespace) -> int:
    rng = np.random.default_rng(int(vars(ns).get("seed", 0)))
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(ns.reps):
        C = angles_to_corr(random_angles(ns.d, rng))
        back = angles_to_corr(corr_to_angles(C))
        worst = max(worst, float(np.max(np.abs(back - C))))
    seconds = time.perf_counter() - t0
    ok = worst < ns.tol
    print(
        "roundtrip-check: d=%d reps=%d, max error %.3e (tol %g), %.2f s -> %s"
        % (ns.d, ns.reps, worst, ns.tol, seconds, "pass" if ok else "FAIL")
    )
    return 0 if ok else 2


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrsearch",
        description="Pattern search over correlation matrices: optimization, "
                    "sparse estimation, simulation, and benchmarks.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")

    def common_model_flags(p, default_loss, default_penalty):
        p.add_argument("--loss", choices=_LOSSES, default=default_loss,
                       help=f"loss kind (default {default_loss})")
        p.add_argument("--penalty", choices=_PENALTIES, default=default_penalty,
                       help=f"penalty family (default {default_penalty})")
        p.add_argument("--lambda", dest="lam", type=float, default=None, metavar="L",
                       help="penalty level")
        p.add_argument("--lambda-grid", default=None, metavar="L1,L2,...",
                       help="candidate penalty levels; the information criterion picks one")
        p.add_argument("--penalty-shape", type=float, default=None, metavar="S",
                       help="concavity shape: a for scad (default 3.7), gamma for mcp (default 3.0)")
        p.add_argument("--mask", default=None, metavar="PATH",
                       help="CSV of symmetric per-entry penalty weights, zero diagonal")

    p_opt = sub.add_parser(
        "optimize", help="minimize a penalized loss over correlation matrices",
        description="Minimize a penalized loss (or an external command) over the "
                    "correlation matrices of a fixed dimension.",
    )
    p_opt.add_argument("--target", default=None, metavar="PATH",
                       help="target correlation matrix CSV (built-in losses)")
    p_opt.add_argument("--blackbox-cmd", default=None, metavar="CMD",
                       help="external evaluator command (see the CSV-line protocol)")
    p_opt.add_argument("--dim", type=int, default=None, metavar="D",
                       help="matrix dimension (required for a black box without --init)")
    p_opt.add_argument("--init", default=None, metavar="PATH",
                       help="starting correlation matrix CSV (default identity)")
    p_opt.add_argument("--header", action="store_true",
                       help="accepted for compatibility; headers are detected automatically")
    p_opt.add_argument("--out", default=".", metavar="DIR",
                       help="output directory (default current directory)")
    common_model_flags(p_opt, default_loss="frobenius", default_penalty="none")
    _add_optimizer_flags(p_opt)
    p_opt.set_defaults(func=_cmd_optimize)

    p_est = sub.add_parser(
        "estimate", help="fit a sparse correlation/covariance estimate to data",
        description="Estimate a sparse correlation matrix (and the implied "
                    "covariance) from an n-by-d data CSV.",
    )
    p_est.add_argument("--data", required=True, metavar="PATH",
                       help="data CSV, one observation per row")
    p_est.add_argument("--blackbox-cmd", default=None, metavar="CMD",
                       help="external loss command when --loss blackbox-cmd")
    p_est.add_argument("--zero-tol", type=float, default=1e-3, metavar="T",
                       help="support threshold on |gamma_hat| (default 1e-3)")
    p_est.add_argument("--header", action="store_true",
                       help="accepted for compatibility; headers are detected automatically")
    p_est.add_argument("--out", default=".", metavar="DIR",
                       help="output directory (default current directory)")
    common_model_flags(p_est, default_loss="gaussian", default_penalty="scad")
    _add_optimizer_flags(p_est)
    p_est.set_defaults(func=_cmd_estimate)

    p_sim = sub.add_parser(
        "simulate", help="replicate generate/sample/estimate/score",
        description="Generate sparse truths, sample Gaussian data, estimate, and "
                    "report support-recovery and error metrics per replication.",
    )
    p_sim.add_argument("--design", choices=DESIGNS, required=True,
                       help="ground-truth correlation design")
    p_sim.add_argument("--d", type=int, required=True, help="matrix dimension")
    p_sim.add_argument("--n", type=int, required=True, help="observations per replication")
    p_sim.add_argument("--reps", type=int, default=10, help="replications (default 10)")
    p_sim.add_argument("--sparsity", type=float, default=0.95, metavar="F",
                       help="zero fraction for the uniform-sparse design (default 0.95)")
    p_sim.add_argument("--zero-tol", type=float, default=1e-3, metavar="T",
                       help="support threshold on |gamma_hat| (default 1e-3)")
    p_sim.add_argument("--sim-parallelism", type=int, default=0, metavar="P",
                       help="process workers across replications (default serial)")
    p_sim.add_argument("--out", default=".", metavar="DIR",
                       help="output directory (default current directory)")
    common_model_flags(p_sim, default_loss="gaussian", default_penalty="scad")
    _add_optimizer_flags(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_ben = sub.add_parser(
        "benchmark", help="optimize a test function from random starts",
        description="Run one of the correlation-matrix test functions from seeded "
                    "random starting matrices and report the best value found.",
    )
    p_ben.add_argument("--fn", choices=FUNCTIONS, required=True, help="test function")
    p_ben.add_argument("--d", type=int, required=True, help="matrix dimension")
    p_ben.add_argument("--reps", type=int, default=10, help="random starts (default 10)")
    p_ben.add_argument("--scale", type=float, default=None,
                       help="argument scaling (defaults per function)")
    p_ben.add_argument("--out", default=".", metavar="DIR",
                       help="output directory (default current directory)")
    _add_optimizer_flags(p_ben)
    p_ben.set_defaults(func=_cmd_benchmark)

    p_rt = sub.add_parser(
        "roundtrip-check", help="validate the angle parameterization",
        description="Draw random correlation matrices, map them to angles and "
                    "back, and compare; exits 0 when the worst error is below --tol.",
    )
    p_rt.add_argument("--d", type=int, required=True, help="matrix dimension")
    p_rt.add_argument("--reps", type=int, default=100, help="matrices to draw (default 100)")
    p_rt.add_argument("--tol", type=float, default=1e-10,
                      help="pass threshold on the max entrywise error (default 1e-10)")
    p_rt.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p_rt.set_defaults(func=_cmd_roundtrip)

    return parser


def run_cli(argv=None) -> int:
    """Parse ``argv`` and run a subcommand; returns the process exit code."""
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed a message; fold its codes into ours
        return 0 if exc.code in (0, None) else 1
    try:
        return ns.func(ns)
    except UsageError as exc:
        print(f"corrsearch: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, RuntimeError, np.linalg.LinAlgError, CorrelationError) as exc:
        print(f"corrsearch: {ns.subcommand} failed: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
