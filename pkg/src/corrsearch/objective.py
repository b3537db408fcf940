"""Objectives on correlation matrices and their angular pullbacks.

A loss measures fit to a target (Gaussian negative log-likelihood or squared
Frobenius distance) or defers to an arbitrary black-box callback; adding a
penalty from :mod:`corrsearch.penalty` gives the search objective.  The
pullback composes the objective with the wrap and angle-to-matrix maps so a
derivative-free engine can work on all of R^N.

Evaluations that fail (singular matrix under the Gaussian loss, a crashing
or non-finite black box) return the infeasible sentinel, the largest finite
double, which loses every comparison against a real value.
"""

from __future__ import annotations

import shlex
import subprocess
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from .corrspace import angles_to_corr, wrap_angles
from .penalty import PenaltySpec, penalty_sum

__all__ = [
    "INFEASIBLE",
    "LossSpec",
    "ObjectiveSpec",
    "loss_value",
    "objective_value",
    "make_pullback",
    "BlackBoxCommand",
]

# Largest finite double: compares greater than every attainable value, so
# candidate polling can never select an infeasible point over a feasible one.
INFEASIBLE = float(np.finfo(np.float64).max)

_KINDS = ("gaussian", "frobenius", "blackbox")


@dataclass(frozen=True)
class LossSpec:
    """Loss selection: built-in fit to a target, or a black-box callback.

    Parameters
    ----------
    kind : str
        "gaussian", "frobenius", or "blackbox".
    target : ndarray, optional
        d x d symmetric target (typically a sample correlation matrix);
        required by the built-in losses.
    callback : callable, optional
        Maps a d x d correlation matrix to a float; required by "blackbox".
        Must be deterministic: the engine's reproducibility guarantees
        assume equal inputs give equal outputs.
    concurrency_safe : bool
        Whether the callback may be invoked from several workers at once.
        Built-in losses are pure and safe; defaults to False for black
        boxes, which makes the engine poll serially.
    """

    kind: str
    target: NDArray | None = None
    callback: object = None
    concurrency_safe: bool | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown loss kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind == "blackbox":
            if not callable(self.callback):
                raise ValueError("blackbox loss requires a callable callback")
            if self.concurrency_safe is None:
                object.__setattr__(self, "concurrency_safe", False)
        else:
            if self.target is None:
                raise ValueError(f"{self.kind} loss requires a target matrix")
            target = np.asarray(self.target, dtype=np.float64)
            if target.ndim != 2 or target.shape[0] != target.shape[1]:
                raise ValueError(f"target must be square, got shape {target.shape}")
            if not np.all(np.isfinite(target)):
                raise ValueError("target contains NaN or infinite entries")
            object.__setattr__(self, "target", target)
            if self.concurrency_safe is None:
                object.__setattr__(self, "concurrency_safe", True)
            # One Cholesky of the target, reused by every Gaussian evaluation:
            # tr(C^-1 T) = ||L^-1 B||_F^2 when T = B B'.
            if self.kind == "gaussian":
                try:
                    chol = np.linalg.cholesky(target)
                except np.linalg.LinAlgError:
                    chol = None
                object.__setattr__(self, "_target_chol", chol)

    @property
    def d(self) -> int | None:
        return None if self.target is None else self.target.shape[0]


@dataclass(frozen=True)
class ObjectiveSpec:
    """A loss plus a penalty; the quantity the engine minimizes."""

    loss: LossSpec
    penalty: PenaltySpec = field(default_factory=lambda: PenaltySpec("none"))


def loss_value(spec: LossSpec, C: NDArray) -> float:
    """Evaluate the loss at a correlation matrix.

    Gaussian: tr(C^-1 T) + log det C, computed from one Cholesky of C;
    raises ``numpy.linalg.LinAlgError`` when C is numerically singular.
    Frobenius: sum of squared differences over all d^2 entries.
    Black box: whatever the callback returns, coerced to float.
    """
    if spec.kind == "blackbox":
        return float(spec.callback(C))
    T = spec.target
    if C.shape != T.shape:
        raise ValueError(f"matrix shape {C.shape} does not match target {T.shape}")
    if spec.kind == "frobenius":
        diff = C - T
        return float(np.sum(diff * diff))
    # gaussian
    L = np.linalg.cholesky(C)
    logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    B = getattr(spec, "_target_chol", None)
    if B is not None:
        half = scipy.linalg.solve_triangular(L, B, lower=True, check_finite=False)
        trace = float(np.sum(half * half))
    else:
        # Target is only positive semidefinite; solve against it directly.
        trace = float(np.trace(scipy.linalg.cho_solve((L, True), T, check_finite=False)))
    return trace + logdet


def objective_value(spec: ObjectiveSpec, C: NDArray) -> float:
    """Loss plus total penalty at a correlation matrix."""
    return loss_value(spec.loss, C) + penalty_sum(spec.penalty, C)


def make_pullback(spec: ObjectiveSpec):
    """Compose the objective with the wrap and angle-to-matrix maps.

    Returns a function of an unconstrained vector phi that evaluates the
    objective at ``angles_to_corr(wrap_angles(phi))``.  Singular matrices
    under the Gaussian loss and non-finite results map to ``INFEASIBLE``
    instead of raising, so the search engine can treat them as ordinary
    (terrible) values.
    """

    def pullback(phi: NDArray) -> float:
        C = angles_to_corr(wrap_angles(phi))
        try:
            value = objective_value(spec, C)
        except np.linalg.LinAlgError:
            return INFEASIBLE
        if not np.isfinite(value):
            return INFEASIBLE
        return value

    return pullback


class BlackBoxCommand:
    """Adapter running an external command as a black-box objective.

    The command is started once and kept alive.  Each evaluation writes the
    d x d matrix to its stdin as d comma-separated lines and reads back one
    line containing a single float.  The protocol is line-buffered; the
    child must flush after each value.

    Not concurrency safe: a single child process serves evaluations one at
    a time, so the engine polls serially when this callback is in use.
    """

    concurrency_safe = False

    def __init__(self, command: str | list[str]):
        self.args = shlex.split(command) if isinstance(command, str) else list(command)
        self._proc = None
        self.evaluations = 0

    def _ensure_started(self):
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                self.args,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )

    def __call__(self, C: NDArray) -> float:
        self._ensure_started()
        proc = self._proc
        try:
            for row in np.asarray(C, dtype=np.float64):
                proc.stdin.write(",".join("%.17g" % v for v in row) + "\n")
            proc.stdin.flush()
            line = proc.stdout.readline()
        except (BrokenPipeError, OSError) as err:
            raise RuntimeError(f"black-box command {self.args!r} is not responding") from err
        if not line:
            code = proc.poll()
            raise RuntimeError(
                f"black-box command {self.args!r} closed its output"
                + (f" (exit code {code})" if code is not None else "")
            )
        self.evaluations += 1
        return float(line)

    def close(self):
        if self._proc is not None and self._proc.poll() is None:
            self._proc.stdin.close()
            self._proc.wait(timeout=10)
        self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
