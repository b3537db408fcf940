"""
Global optimization over correlation matrices, scored on classic test functions
===============================================================================

The search engine never sees the constraint set: it polls unconstrained
angle vectors, and the wrap + reconstruction maps every candidate to a
valid matrix.  Here we aim it at Griewank and Ackley composed with the
parameterization and watch it find the identity (where both functions
are exactly zero).
"""

import numpy as np

from corrsearch import BenchmarkSpec, OptimizerConfig, bench_value, run_benchmark

# Grid restarts matter on multimodal surfaces: each restart draws a fresh
# lattice point instead of re-polishing the incumbent basin.
config = OptimizerConfig(restart="grid", max_run=3, kappa=1e-9, tau1=1e-12, tau2=0.0)

for name in ("griewank", "ackley"):
    spec = BenchmarkSpec(name, d=5)
    result = run_benchmark(spec, reps=5, config=config, seed=0)
    print("%-9s d=5  best %.3e  mean seconds %.1f  (identity value %.1f)" % (
        name, result.best, result.mean_seconds, bench_value(spec, np.eye(5))))

# Rosenbrock is the odd one out: its minimum is NOT at the identity (the
# classical minimizer at all-ones is not a reachable off-diagonal vector),
# so treat its numbers as descriptive rather than a pass/fail target.
spec = BenchmarkSpec("rosenbrock", d=5)
result = run_benchmark(spec, reps=5, config=config, seed=0)
print("%-9s d=5  best %.6g  (identity value %.1f)" % (
    "rosenbrock", result.best, bench_value(spec, np.eye(5))))
