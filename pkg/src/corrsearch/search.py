"""Pattern search over correlation matrices in angular coordinates.

The engine minimizes a pullback objective f(phi) over unconstrained angle
vectors.  Each iteration polls 2N candidates, one step up and one step down
per coordinate (the moved coordinate is wrapped back into the angle domain),
accepts the best candidate only on strict improvement, and shrinks the step
geometrically when progress stalls.  A run ends when the step reaches its
floor or the iteration cap; the engine then restarts, either warm from the
best point so far or from a random point of a shrinking lattice, until runs
stop improving or the run cap is hit.

Every evaluated vector lies in the angle domain, so every matrix the
objective sees is a valid correlation matrix; feasibility needs no
constraint handling at all.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .corrspace import (
    angles_to_corr,
    corr_to_angles,
    dim_from_num_angles,
    num_angles,
    wrap_angles,
    wrap_cases,
    wrap_periods,
    wrap_scalar,
)
from .objective import INFEASIBLE, ObjectiveSpec, make_pullback

__all__ = [
    "OptimizerConfig",
    "RunResult",
    "EvaluationError",
    "optimize",
    "poll_candidates",
    "stationarity_check",
]

_RESTARTS = ("warm", "grid")


@dataclass(frozen=True)
class OptimizerConfig:
    """Tuning knobs for the search engine.

    Parameters
    ----------
    s_initial : float
        Step size at the start of every run.
    rho : float
        Geometric step-reduction factor (> 1).
    kappa : float
        Step floor; a run ends once the step would fall to kappa or below.
    tau1 : float
        Improvement threshold for step reduction: an iteration that improves
        by less than tau1 (including not at all) triggers a shrink.
    tau2 : float
        Across-run threshold: stop when consecutive run values differ by
        less than tau2.  The first run never triggers this test.
    max_iter : int
        Iteration cap per run.
    max_run : int
        Cap on the number of runs.
    restart : str
        "warm" restarts from the best point found so far; "grid" restarts
        from a uniform draw on a lattice of mesh ``grid_mesh_initial``
        (divided by ``grid_mesh_divisor`` at each successive restart,
        offset by ``grid_offset``) covering one period per coordinate.
    strict_failure_shrink : bool
        When True, shrink the step only after an iteration with no
        improving candidate, never after a small improvement.  This is the
        variant whose value gap after the r-th reduction decays like
        1/(r+1) on smooth convex instances.
    cache_objective : bool
        When True, carry the incumbent's value across iterations instead of
        re-evaluating it each iteration.  Results are identical; only the
        evaluation count changes.
    seed : int or None
        Seed for the restart lattice draws (grid mode only).
    parallelism : int
        Worker threads for candidate polling; 0 or 1 means serial.
        Ignored when the objective declares itself unsafe for concurrency.
    """

    s_initial: float = 1.0
    rho: float = 2.0
    kappa: float = 1e-6
    tau1: float = 1e-8
    tau2: float = 1e-6
    max_iter: int = 10000
    max_run: int = 10
    restart: str = "warm"
    grid_mesh_initial: float = 0.5
    grid_mesh_divisor: float = 2.0
    grid_offset: float = 0.0
    strict_failure_shrink: bool = False
    cache_objective: bool = False
    seed: int | None = None
    parallelism: int = 0

    def __post_init__(self):
        if not self.s_initial > 0:
            raise ValueError(f"s_initial must be > 0, got {self.s_initial}")
        if not self.rho > 1:
            raise ValueError(f"rho must be > 1, got {self.rho}")
        if not 0 < self.kappa < self.s_initial:
            raise ValueError(
                f"kappa must satisfy 0 < kappa < s_initial, got {self.kappa}"
            )
        if self.tau1 < 0 or self.tau2 < 0:
            raise ValueError("tau1 and tau2 must be >= 0")
        if self.max_iter < 1 or self.max_run < 1:
            raise ValueError("max_iter and max_run must be >= 1")
        if self.restart not in _RESTARTS:
            raise ValueError(
                f"unknown restart mode {self.restart!r}; expected one of {_RESTARTS}"
            )
        if not self.grid_mesh_initial > 0:
            raise ValueError("grid_mesh_initial must be > 0")
        if not self.grid_mesh_divisor > 1:
            raise ValueError("grid_mesh_divisor must be > 1")
        if self.parallelism < 0:
            raise ValueError("parallelism must be >= 0")


@dataclass
class RunResult:
    """Outcome of :func:`optimize`.

    ``trace`` holds one row per iteration: (run, iteration, step_size,
    best_value, evaluations), where best_value is the best objective value
    seen up to and including that iteration and evaluations is the
    cumulative evaluation count.  ``run_values`` holds each run's final
    incumbent value.
    """

    best_phi: NDArray
    best_value: float
    best_corr: NDArray
    trace: list = field(default_factory=list)
    evaluations: int = 0
    runs_completed: int = 0
    run_values: list = field(default_factory=list)


class EvaluationError(RuntimeError):
    """Objective evaluation failed in a way the engine cannot route around.

    Carries whatever progress was made in ``partial_result`` (may be None
    when the very first evaluation failed).
    """

    def __init__(self, message, partial_result=None):
        super().__init__(message)
        self.partial_result = partial_result


def _resolve_evaluator(objective):
    if isinstance(objective, ObjectiveSpec):
        return make_pullback(objective), bool(objective.loss.concurrency_safe)
    if callable(objective):
        return objective, bool(getattr(objective, "concurrency_safe", True))
    raise TypeError(
        f"objective must be an ObjectiveSpec or a callable, got {type(objective)!r}"
    )


def _guarded(evaluator, phi):
    # Candidate-level guard: exceptions and NaNs become the sentinel.
    try:
        value = float(evaluator(phi))
    except Exception:
        return INFEASIBLE, True
    if math.isnan(value):
        return INFEASIBLE, False
    return value, False


def _poll(evaluator, phi, s, codes, pool):
    """Evaluate all 2N single-coordinate candidates at step s.

    Candidate h (h = 1..2N, returned 0-based) perturbs coordinate
    i = floor((h+1)/2) by (-1)^h * s and wraps that coordinate.  All
    candidates are evaluated; there is no early exit.
    """
    n = phi.size
    cands = []
    for i in range(n):
        code = int(codes[i])
        down = phi.copy()
        down[i] = wrap_scalar(phi[i] - s, code)
        up = phi.copy()
        up[i] = wrap_scalar(phi[i] + s, code)
        cands.append(down)
        cands.append(up)
    if pool is not None:
        results = list(pool.map(lambda c: _guarded(evaluator, c), cands))
    else:
        results = [_guarded(evaluator, c) for c in cands]
    values = np.array([r[0] for r in results])
    failures = sum(1 for r in results if r[1])
    return values, cands, failures


def poll_candidates(objective, phi, s, parallelism=0):
    """Poll the 2N coordinate candidates around phi at step size s.

    Returns ``(h_best, f_best, values)``: the 0-based index of the best
    candidate (ties broken toward the smallest index), its value, and the
    array of all 2N values in candidate order (coordinate-major, step down
    before step up).
    """
    evaluator, safe = _resolve_evaluator(objective)
    phi = np.asarray(phi, dtype=np.float64)
    codes = wrap_cases(dim_from_num_angles(phi.size))
    pool = None
    try:
        if parallelism >= 2 and safe:
            pool = ThreadPoolExecutor(max_workers=parallelism)
        values, _, failures = _poll(evaluator, phi, s, codes, pool)
    finally:
        if pool is not None:
            pool.shutdown()
    if failures == values.size:
        raise EvaluationError("every candidate evaluation failed")
    h_best = int(np.argmin(values))
    return h_best, float(values[h_best]), values


def _grid_start(rng, periods, mesh, offset):
    # Uniform draw from {offset + k*mesh : k integer} within [0, period) per
    # coordinate, folded into the angle domain.
    lo = np.ceil((0.0 - offset) / mesh).astype(np.int64)
    hi = np.ceil((periods - offset) / mesh).astype(np.int64)
    hi = np.maximum(hi, lo + 1)
    ks = rng.integers(lo, hi)
    return wrap_angles(offset + ks * mesh)


def optimize(objective, init: NDArray, config: OptimizerConfig | None = None) -> RunResult:
    """Minimize an objective over correlation matrices.

    Parameters
    ----------
    objective : ObjectiveSpec or callable
        Either a loss/penalty specification, or a function of an
        unconstrained angle vector returning a float (e.g. a custom
        pullback).  Callables are assumed safe to call concurrently unless
        they carry a ``concurrency_safe = False`` attribute.
    init : ndarray, shape (d, d)
        Positive definite correlation matrix to start from.
    config : OptimizerConfig, optional
        Engine settings; defaults are suitable for moderate dimensions.

    Returns
    -------
    RunResult
        Best point found (as angles and as a matrix), the full iteration
        trace, evaluation count, and per-run values.

    Raises
    ------
    EvaluationError
        If an incumbent evaluation raises or every candidate in a poll
        fails; the partial trace is attached to the exception.
    """
    cfg = config if config is not None else OptimizerConfig()
    evaluator, safe = _resolve_evaluator(objective)

    init = np.asarray(init, dtype=np.float64)
    if init.ndim != 2 or init.shape[0] != init.shape[1]:
        raise ValueError(f"init must be a square matrix, got shape {init.shape}")
    if not np.all(np.isfinite(init)):
        raise ValueError("init contains NaN or infinite entries")
    if np.max(np.abs(init - init.T)) > 1e-8:
        raise ValueError("init must be symmetric")
    d = init.shape[0]
    n = num_angles(d)
    codes = wrap_cases(d)
    periods = wrap_periods(d)
    rng = np.random.default_rng(cfg.seed)

    phi = corr_to_angles(init)
    trace = []
    evaluations = 0
    run_values = []
    best_phi = phi.copy()
    best_value = math.inf

    def partial():
        return RunResult(
            best_phi=best_phi.copy(),
            best_value=best_value,
            best_corr=angles_to_corr(best_phi),
            trace=list(trace),
            evaluations=evaluations,
            runs_completed=len(run_values),
            run_values=list(run_values),
        )

    def eval_incumbent(point):
        nonlocal evaluations
        try:
            value = float(evaluator(point))
        except Exception as err:
            raise EvaluationError(
                f"incumbent evaluation failed: {err}", partial_result=partial()
            ) from err
        evaluations += 1
        return INFEASIBLE if math.isnan(value) else value

    pool = None
    if cfg.parallelism >= 2 and safe:
        pool = ThreadPoolExecutor(max_workers=cfg.parallelism)
    try:
        run = 1
        while True:
            s = cfg.s_initial
            j = 1
            cached = eval_incumbent(phi) if cfg.cache_objective else None
            current = cached
            while j <= cfg.max_iter and s > cfg.kappa:
                if cfg.cache_objective:
                    f_current = cached
                else:
                    f_current = eval_incumbent(phi)
                if f_current < best_value:
                    best_value = f_current
                    best_phi = phi.copy()

                values, cands, failures = _poll(evaluator, phi, s, codes, pool)
                evaluations += values.size
                if failures == values.size:
                    raise EvaluationError(
                        "every candidate evaluation failed", partial_result=partial()
                    )
                h_best = int(np.argmin(values))
                f_best = float(values[h_best])

                accepted = f_best < f_current
                if accepted:
                    phi = cands[h_best]
                    current = f_best
                else:
                    current = f_current
                if current < best_value:
                    best_value = current
                    best_phi = phi.copy()
                trace.append((run, j, s, best_value, evaluations))

                if cfg.strict_failure_shrink:
                    shrink = (not accepted) and s > cfg.kappa
                else:
                    improvement = abs(f_current - min(f_current, f_best))
                    shrink = j > 1 and improvement < cfg.tau1 and s > cfg.kappa
                if shrink:
                    s = s / cfg.rho
                cached = current
                j += 1

            run_values.append(current)
            converged = run >= 2 and abs(run_values[-1] - run_values[-2]) < cfg.tau2
            if run >= cfg.max_run or converged:
                break
            run += 1
            if cfg.restart == "warm":
                phi = best_phi.copy()
            else:
                mesh = cfg.grid_mesh_initial / cfg.grid_mesh_divisor ** (run - 2)
                phi = _grid_start(rng, periods, mesh, cfg.grid_offset)
    finally:
        if pool is not None:
            pool.shutdown()

    return RunResult(
        best_phi=best_phi,
        best_value=best_value,
        best_corr=angles_to_corr(best_phi),
        trace=trace,
        evaluations=evaluations,
        runs_completed=len(run_values),
        run_values=run_values,
    )


def stationarity_check(objective, phi, h: float = 1e-5) -> float:
    """Max-norm of a central-difference gradient of the pullback at phi.

    Small values at a solution are the practical counterpart of the
    engine's stationarity guarantee on smooth objectives.
    """
    evaluator, _ = _resolve_evaluator(objective)
    phi = np.asarray(phi, dtype=np.float64)
    worst = 0.0
    for i in range(phi.size):
        up = phi.copy()
        up[i] = phi[i] + h
        down = phi.copy()
        down[i] = phi[i] - h
        g = abs(float(evaluator(up)) - float(evaluator(down))) / (2.0 * h)
        worst = max(worst, g)
    return worst
