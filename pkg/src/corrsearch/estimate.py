"""Penalized sparse correlation and covariance estimation.

Pipeline: sample moments -> penalized fit over the correlation manifold ->
support by thresholding -> covariance recovery through the sample scales.
The fit minimizes loss(C; sample correlation) + penalty(C) with the pattern
search engine, so nothing here requires gradients, convexity, or even n > d
(use the Frobenius loss when the sample correlation is singular).

Lambda selection over a grid uses a BIC-style score,
n * loss + log(n) * |support|, with |support| the number of nonzero
unordered off-diagonal pairs at the current zero threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .objective import LossSpec, ObjectiveSpec, loss_value
from .penalty import PenaltySpec
from .search import OptimizerConfig, RunResult, optimize

__all__ = [
    "sample_moments",
    "recover_sigma",
    "EstimateResult",
    "estimate",
]


def sample_moments(X: NDArray, ddof: int = 1) -> tuple[NDArray, NDArray, NDArray]:
    """Sample covariance, sample correlation, and scale diagonal.

    Parameters
    ----------
    X : ndarray, shape (n, d)
        Data rows; requires n >= 2, d >= 2, finite entries.
    ddof : int
        Covariance denominator is n - ddof (default n - 1).

    Returns
    -------
    (S, gamma_s, w_diag)
        S: sample covariance; gamma_s: sample correlation with exact unit
        diagonal; w_diag: per-column scales, w_i = sqrt(S_ii).

    Raises
    ------
    ValueError
        On bad shapes, non-finite entries, or any zero-variance column
        (named by index).
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"data must be 2-d (rows x columns), got shape {X.shape}")
    n, d = X.shape
    if n < 2:
        raise ValueError(f"need at least 2 rows to form moments, got {n}")
    if d < 2:
        raise ValueError(f"need at least 2 columns, got {d}")
    if not np.all(np.isfinite(X)):
        raise ValueError("data contains NaN or infinite entries")
    S = np.cov(X, rowvar=False, ddof=ddof)
    var = np.diag(S)
    bad = np.flatnonzero(var <= 0)
    if bad.size:
        cols = ", ".join(str(int(i)) for i in bad)
        raise ValueError(f"zero-variance column(s): {cols}; correlations are undefined")
    w = np.sqrt(var)
    gamma = S / np.outer(w, w)
    gamma = 0.5 * (gamma + gamma.T)
    np.fill_diagonal(gamma, 1.0)
    return S, gamma, w


def recover_sigma(gamma: NDArray, w_diag: NDArray) -> NDArray[np.float64]:
    """Rescale a correlation estimate to a covariance: sigma_ij = w_i gamma_ij w_j."""
    gamma = np.asarray(gamma, dtype=np.float64)
    w = np.asarray(w_diag, dtype=np.float64)
    if w.ndim != 1 or w.size != gamma.shape[0]:
        raise ValueError(
            f"scale vector length {w.size} does not match matrix dimension {gamma.shape[0]}"
        )
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ValueError("scales must be positive and finite")
    return np.outer(w, w) * gamma


@dataclass
class EstimateResult:
    """Fitted correlation/covariance estimate and selection details.

    ``support`` is the 0/1 pattern of off-diagonal entries with
    |gamma_hat| >= zero_tol; ``gamma_hat`` itself keeps raw values.
    ``scores`` maps each grid lambda to its selection score (None when a
    single lambda was fitted directly).
    """

    gamma_hat: NDArray
    sigma_hat: NDArray
    support: NDArray
    w_diag: NDArray
    lambda_used: float
    zero_tol: float
    optimizer: RunResult
    scores: dict | None = None


def _support_from(gamma: NDArray, zero_tol: float) -> NDArray[np.int_]:
    sup = (np.abs(gamma) >= zero_tol).astype(int)
    np.fill_diagonal(sup, 0)
    return sup


def estimate(
    X: NDArray,
    *,
    loss: str = "gaussian",
    penalty_family: str = "scad",
    lam: float = 0.0,
    lambda_grid=None,
    shape: float | None = None,
    mask: NDArray | None = None,
    callback=None,
    config: OptimizerConfig | None = None,
    zero_tol: float = 1e-3,
) -> EstimateResult:
    """Fit a sparse correlation matrix to data.

    Parameters
    ----------
    X : ndarray, shape (n, d)
        Data rows.
    loss : str
        "gaussian" (negative log-likelihood against the sample
        correlation), "frobenius", or "blackbox" (requires ``callback``).
    penalty_family : str
        "none", "l1", "scad", or "mcp".
    lam : float
        Penalty level when no grid is given.
    lambda_grid : sequence of float, optional
        Candidate levels; the one minimizing n * loss + log(n) * |support|
        is selected (ties go to the first minimizer in grid order).
    shape : float, optional
        SCAD a / MCP gamma override.
    mask : ndarray, optional
        Symmetric penalty weight mask with zero diagonal.
    callback : callable, optional
        Black-box loss on correlation matrices (loss="blackbox").
    config : OptimizerConfig, optional
        Search engine settings.
    zero_tol : float
        Entries with |gamma_hat| < zero_tol count as zeros in the support.

    Returns
    -------
    EstimateResult

    Raises
    ------
    ValueError
        For a Gaussian loss with a singular sample correlation (advice:
        use the Frobenius loss) and for ingestion problems.
    """
    S, gamma_s, w = sample_moments(X)
    n, d = np.asarray(X).shape
    if zero_tol < 0:
        raise ValueError(f"zero_tol must be >= 0, got {zero_tol}")

    if loss == "blackbox":
        loss_spec = LossSpec("blackbox", callback=callback)
    else:
        loss_spec = LossSpec(loss, target=gamma_s)
    if loss == "gaussian" and getattr(loss_spec, "_target_chol", None) is None:
        raise ValueError(
            "sample correlation is singular (n <= d?); the Gaussian likelihood "
            "is unbounded below -- use loss='frobenius' instead"
        )

    # Start from the sample correlation when it is usable, else identity.
    try:
        np.linalg.cholesky(gamma_s)
        init = gamma_s
    except np.linalg.LinAlgError:
        init = np.eye(d)

    def fit(level: float):
        pen = PenaltySpec(penalty_family, lam=level, shape=shape, mask=mask)
        spec = ObjectiveSpec(loss_spec, pen)
        return optimize(spec, init, config)

    def score_of(gamma: NDArray, support: NDArray) -> float:
        pairs = int(np.sum(support)) // 2
        return float(n) * loss_value(loss_spec, gamma) + math.log(n) * pairs

    scores = None
    if lambda_grid is not None:
        grid = [float(v) for v in lambda_grid]
        if not grid:
            raise ValueError("lambda_grid must be non-empty")
        best = None
        scores = {}
        for level in grid:
            res = fit(level)
            sup = _support_from(res.best_corr, zero_tol)
            sc = score_of(res.best_corr, sup)
            scores[level] = sc
            if best is None or sc < best[0]:
                best = (sc, level, res, sup)
        _, lambda_used, result, support = best
    else:
        lambda_used = float(lam)
        result = fit(lambda_used)
        support = _support_from(result.best_corr, zero_tol)

    gamma_hat = result.best_corr
    sigma_hat = recover_sigma(gamma_hat, w)
    # gamma_hat has an exact unit diagonal, so the fitted variances are the
    # sample variances; write them exactly.
    np.fill_diagonal(sigma_hat, np.diag(S))
    return EstimateResult(
        gamma_hat=gamma_hat,
        sigma_hat=sigma_hat,
        support=support,
        w_diag=w,
        lambda_used=lambda_used,
        zero_tol=zero_tol,
        optimizer=result,
        scores=scores,
    )
