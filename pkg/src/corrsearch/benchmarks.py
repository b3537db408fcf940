"""Classical test functions composed with the correlation parameterization.

Each benchmark reads the d(d-1) off-diagonal entries of a correlation
matrix in row-major order, scales them (correlations live in [-1, 1], far
too small for these functions' interesting ranges), and applies the
classical formula.  All four are minimized when every off-diagonal entry is
zero, i.e. at the identity matrix; Ackley, Griewank, and Rastrigin attain
exactly 0 there, while Rosenbrock's sum of d(d-1) - 1 unit terms makes its
identity value d(d-1) - 1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import NDArray

from .corrspace import angles_to_corr, random_angles, wrap_angles
from .search import OptimizerConfig, optimize

__all__ = [
    "FUNCTIONS",
    "BenchmarkSpec",
    "offdiag_vector",
    "bench_value",
    "bench_pullback",
    "BenchmarkResult",
    "run_benchmark",
]

FUNCTIONS = ("ackley", "griewank", "rastrigin", "rosenbrock")

_DEFAULT_SCALE = {"ackley": 10.0, "griewank": 100.0, "rastrigin": 10.0, "rosenbrock": 100.0}


@dataclass(frozen=True)
class BenchmarkSpec:
    """Benchmark function, matrix dimension, and entry scaling."""

    name: str
    d: int
    scale: float | None = None

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise ValueError(
                f"unknown benchmark {self.name!r}; expected one of {FUNCTIONS}"
            )
        if self.d < 2:
            raise ValueError(f"d must be >= 2, got {self.d}")
        if self.scale is None:
            object.__setattr__(self, "scale", _DEFAULT_SCALE[self.name])


def offdiag_vector(C: NDArray) -> NDArray[np.float64]:
    """All d(d-1) off-diagonal entries in row-major order."""
    C = np.asarray(C, dtype=np.float64)
    d = C.shape[0]
    return C[~np.eye(d, dtype=bool)]


def bench_value(spec: BenchmarkSpec, C: NDArray) -> float:
    """Evaluate the benchmark at a correlation matrix."""
    x = spec.scale * offdiag_vector(C)
    n = x.size
    if spec.name == "ackley":
        rms = np.sqrt(np.mean(x * x))
        mean_cos = np.mean(np.cos(2.0 * np.pi * x))
        # Grouped so the identity evaluates to exactly 0.0 in doubles.
        return float(20.0 * (1.0 - np.exp(-0.2 * rms)) + (np.e - np.exp(mean_cos)))
    if spec.name == "griewank":
        idx = np.arange(1, n + 1, dtype=np.float64)
        return float(np.sum(x * x) / 4000.0 - np.prod(np.cos(x / np.sqrt(idx))) + 1.0)
    if spec.name == "rastrigin":
        return float(10.0 * n + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))
    # rosenbrock
    head = x[:-1]
    tail = x[1:]
    return float(np.sum(100.0 * (tail - head * head) ** 2 + (1.0 - head) ** 2))


def bench_pullback(spec: BenchmarkSpec):
    """Total pullback of the benchmark onto unconstrained angle vectors."""

    def pullback(phi):
        return bench_value(spec, angles_to_corr(wrap_angles(phi)))

    return pullback


@dataclass
class BenchmarkResult:
    """Best-of-replications outcome: per-replication values and timing."""

    spec: BenchmarkSpec
    values: NDArray
    seconds: NDArray
    evaluations: NDArray

    @property
    def best(self) -> float:
        return float(np.min(self.values))

    @property
    def se_values(self) -> float:
        if self.values.size < 2:
            return 0.0
        return float(np.std(self.values, ddof=1) / np.sqrt(self.values.size))

    @property
    def mean_seconds(self) -> float:
        return float(np.mean(self.seconds))

    @property
    def se_seconds(self) -> float:
        if self.seconds.size < 2:
            return 0.0
        return float(np.std(self.seconds, ddof=1) / np.sqrt(self.seconds.size))


def run_benchmark(
    spec: BenchmarkSpec,
    reps: int = 10,
    config: OptimizerConfig | None = None,
    seed: int = 0,
) -> BenchmarkResult:
    """Optimize a benchmark from ``reps`` seeded random starting matrices.

    Replication r draws its starting point (and, in grid-restart mode, its
    restart stream) from (seed, r), so the whole sweep is reproducible.
    """
    import time

    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    cfg = config if config is not None else OptimizerConfig()
    pullback = bench_pullback(spec)
    values = np.empty(reps)
    seconds = np.empty(reps)
    evaluations = np.empty(reps, dtype=np.int64)
    for rep in range(reps):
        ss = np.random.SeedSequence([seed, rep])
        rng = np.random.default_rng(ss)
        init = angles_to_corr(random_angles(spec.d, rng))
        rep_cfg = replace(cfg, seed=int(ss.generate_state(1)[0]))
        t0 = time.perf_counter()
        res = optimize(pullback, init, rep_cfg)
        seconds[rep] = time.perf_counter() - t0
        values[rep] = res.best_value
        evaluations[rep] = res.evaluations
    return BenchmarkResult(spec=spec, values=values, seconds=seconds, evaluations=evaluations)
