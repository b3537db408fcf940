"""Synthetic truths, Gaussian sampling, and recovery metrics.

Five ground-truth designs cover the usual sparse-covariance test cases:
random within-block correlation (``block-random5``), scattered moderate
correlations at a requested sparsity (``uniform-sparse``), equicorrelated
blocks (``block-fixed``), geometric decay (``toeplitz``), and linear decay
with a hard cutoff (``banded``).  All five produce unit-diagonal positive
definite matrices, so each serves as both a covariance and a correlation
truth.

``compute_metrics`` scores support recovery (TPR/FPR/MCC over unordered
off-diagonal pairs) and estimation error (RMSE/MAD off-diagonal, Frobenius
and spectral norms overall).  ``simulate`` chains truth generation,
sampling, estimation, and scoring over seeded replications.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .corrspace import num_angles, random_corr

__all__ = [
    "DESIGNS",
    "TruthSpec",
    "gen_truth",
    "support_of",
    "sample_mvn",
    "MetricsReport",
    "compute_metrics",
    "simulate",
]

DESIGNS = ("block-random5", "uniform-sparse", "block-fixed", "toeplitz", "banded")

_SPARSE_MAX_TRIES = 10_000


@dataclass(frozen=True)
class TruthSpec:
    """Ground-truth design selection.

    ``sparsity`` (uniform-sparse only) is the target fraction of zero
    off-diagonal pairs; the number of nonzero pairs is
    round((1 - sparsity) * d(d-1)/2), matched exactly.
    """

    design: str
    d: int
    sparsity: float = 0.95
    seed: int | None = None

    def __post_init__(self):
        if self.design not in DESIGNS:
            raise ValueError(
                f"unknown design {self.design!r}; expected one of {DESIGNS}"
            )
        if self.d < 2:
            raise ValueError(f"d must be >= 2, got {self.d}")
        if self.design == "block-random5" and self.d % 5 != 0:
            raise ValueError(f"block-random5 needs d divisible by 5, got d={self.d}")
        if self.design == "block-fixed" and self.d % 10 != 0:
            raise ValueError(f"block-fixed needs d divisible by 10, got d={self.d}")
        if not 0.0 <= self.sparsity <= 1.0:
            raise ValueError(f"sparsity must be in [0, 1], got {self.sparsity}")


def support_of(M: NDArray) -> NDArray[np.int_]:
    """0/1 off-diagonal nonzero pattern of a matrix (diagonal left 0)."""
    sup = (np.asarray(M) != 0).astype(int)
    np.fill_diagonal(sup, 0)
    return sup


def gen_truth(spec: TruthSpec, rng=None) -> tuple[NDArray, NDArray]:
    """Generate a ground-truth matrix and its off-diagonal support.

    Returns
    -------
    (matrix, support)
        ``matrix`` is d x d, unit diagonal, positive definite; ``support``
        is its 0/1 off-diagonal nonzero pattern.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    d = spec.d
    if spec.design == "block-random5":
        M = np.zeros((d, d))
        for b in range(d // 5):
            sl = slice(5 * b, 5 * b + 5)
            M[sl, sl] = random_corr(5, rng)
    elif spec.design == "uniform-sparse":
        M = _uniform_sparse(d, spec.sparsity, rng)
    elif spec.design == "block-fixed":
        block = np.repeat(np.arange(d // 10), 10)
        M = 0.8 * (block[:, None] == block[None, :]).astype(float)
        np.fill_diagonal(M, 1.0)
    elif spec.design == "toeplitz":
        idx = np.arange(d)
        M = 0.75 ** np.abs(idx[:, None] - idx[None, :])
    else:  # banded
        gap = np.abs(np.arange(d)[:, None] - np.arange(d)[None, :])
        M = np.where(gap <= 10, 1.0 - gap / 10.0, 0.0)
    return M, support_of(M)


def _uniform_sparse(d, sparsity, rng):
    n_pairs = num_angles(d)  # d(d-1)/2
    n_nonzero = int(round((1.0 - sparsity) * n_pairs))
    iu = np.triu_indices(d, k=1)
    for _ in range(_SPARSE_MAX_TRIES):
        M = np.eye(d)
        if n_nonzero > 0:
            chosen = rng.choice(n_pairs, size=n_nonzero, replace=False)
            vals = rng.uniform(0.3, 0.6, size=n_nonzero)
            M[iu[0][chosen], iu[1][chosen]] = vals
            M[iu[1][chosen], iu[0][chosen]] = vals
        try:
            np.linalg.cholesky(M)
        except np.linalg.LinAlgError:
            continue
        return M
    raise RuntimeError(
        f"no positive definite draw in {_SPARSE_MAX_TRIES} attempts "
        f"(d={d}, sparsity={sparsity}); lower the nonzero count or magnitudes"
    )


def sample_mvn(sigma: NDArray, n: int, rng) -> NDArray[np.float64]:
    """Draw n rows from N(0, sigma) as Z L' with L the Cholesky factor.

    ``rng`` may be a Generator, SeedSequence, or integer seed.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(rng)
    sigma = np.asarray(sigma, dtype=np.float64)
    L = np.linalg.cholesky(sigma)
    Z = rng.standard_normal((n, sigma.shape[0]))
    return Z @ L.T


@dataclass(frozen=True)
class MetricsReport:
    """Support-recovery and estimation-error metrics for one estimate."""

    tpr: float
    fpr: float
    mcc: float
    rmse: float
    mad: float
    frob_err: float
    spec_err: float


def compute_metrics(
    truth: NDArray,
    truth_support: NDArray,
    est: NDArray,
    est_support: NDArray,
) -> MetricsReport:
    """Score an estimate against the truth.

    Support metrics (TPR, FPR, MCC) are computed over unordered
    off-diagonal pairs; any metric whose denominator is zero is reported
    as 0.  RMSE and MAD average over off-diagonal pairs; the Frobenius
    error covers all entries; the spectral error is the largest absolute
    eigenvalue of the (symmetric) difference.
    """
    truth = np.asarray(truth, dtype=np.float64)
    est = np.asarray(est, dtype=np.float64)
    if truth.shape != est.shape:
        raise ValueError(f"shape mismatch: truth {truth.shape} vs estimate {est.shape}")
    d = truth.shape[0]
    iu = np.triu_indices(d, k=1)
    t = np.asarray(truth_support)[iu].astype(bool)
    e = np.asarray(est_support)[iu].astype(bool)

    tp = int(np.sum(t & e))
    fp = int(np.sum(~t & e))
    fn = int(np.sum(t & ~e))
    tn = int(np.sum(~t & ~e))

    tpr = tp / (tp + fn) if tp + fn > 0 else 0.0
    fpr = fp / (fp + tn) if fp + tn > 0 else 0.0
    denom = (
        float(tp + fp) * float(tp + fn) * float(tn + fp) * float(tn + fn)
    )
    mcc = (tp * tn - fp * fn) / np.sqrt(denom) if denom > 0 else 0.0

    diff = est - truth
    off = diff[iu]
    rmse = float(np.sqrt(np.mean(off * off))) if off.size else 0.0
    mad = float(np.mean(np.abs(off))) if off.size else 0.0
    frob = float(np.linalg.norm(diff, "fro"))
    spec = float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.T)))))
    return MetricsReport(
        tpr=float(tpr),
        fpr=float(fpr),
        mcc=float(mcc),
        rmse=rmse,
        mad=mad,
        frob_err=frob,
        spec_err=spec,
    )


def _simulate_one(args):
    # Module-level so process pools can pickle it.
    from .estimate import estimate

    (rep, design, d, n, sparsity, loss, family, lam, grid, shape, config, zero_tol, seed) = args
    truth_rng = np.random.default_rng(np.random.SeedSequence([seed, rep, 0]))
    spec = TruthSpec(design=design, d=d, sparsity=sparsity)
    truth, truth_support = gen_truth(spec, truth_rng)
    X = sample_mvn(truth, n, np.random.SeedSequence([seed, rep, 1]))
    t0 = time.perf_counter()
    result = estimate(
        X,
        loss=loss,
        penalty_family=family,
        lam=lam,
        lambda_grid=grid,
        shape=shape,
        config=config,
        zero_tol=zero_tol,
    )
    seconds = time.perf_counter() - t0
    metrics = compute_metrics(truth, truth_support, result.gamma_hat, result.support)
    row = {
        "rep": rep,
        "design": design,
        "d": d,
        "n": n,
        "method": f"{loss}+{family}",
        "lambda": result.lambda_used,
        "tpr": metrics.tpr,
        "fpr": metrics.fpr,
        "mcc": metrics.mcc,
        "rmse": metrics.rmse,
        "mad": metrics.mad,
        "frob_err": metrics.frob_err,
        "spec_err": metrics.spec_err,
        "seconds": seconds,
    }
    return row


_METRIC_COLS = ("tpr", "fpr", "mcc", "rmse", "mad", "frob_err", "spec_err")


def simulate(
    design: str,
    d: int,
    n: int,
    reps: int,
    *,
    loss: str = "gaussian",
    penalty_family: str = "scad",
    lam: float = 0.0,
    lambda_grid=None,
    shape: float | None = None,
    config=None,
    zero_tol: float = 1e-3,
    sparsity: float = 0.95,
    seed: int = 0,
    parallelism: int = 0,
) -> tuple[list[dict], dict]:
    """Run seeded replications of generate / sample / estimate / score.

    Replication r derives its truth, data, and optimizer seeds from
    (seed, r), so results are identical whether replications run serially
    or across a process pool (timing fields aside).

    Returns
    -------
    (rows, summary)
        ``rows``: one dict per replication with metrics and timing.
        ``summary``: {metric: (mean, stderr)} over replications.
    """
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    TruthSpec(design=design, d=d, sparsity=sparsity)  # validate early
    args = [
        (
            rep,
            design,
            d,
            n,
            sparsity,
            loss,
            penalty_family,
            lam,
            None if lambda_grid is None else tuple(lambda_grid),
            shape,
            config,
            zero_tol,
            seed,
        )
        for rep in range(reps)
    ]
    if parallelism >= 2:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            rows = list(pool.map(_simulate_one, args))
    else:
        rows = [_simulate_one(a) for a in args]

    summary = {}
    for col in _METRIC_COLS:
        vals = np.array([row[col] for row in rows], dtype=np.float64)
        mean = float(np.mean(vals))
        stderr = float(np.std(vals, ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
        summary[col] = (mean, stderr)
    return rows, summary
