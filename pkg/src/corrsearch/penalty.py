"""Sparsity penalties on off-diagonal correlation entries.

Supports the two folded-concave penalties whose flat tails stop large
entries from being shrunk (SCAD and MCP), plus the plain L1 penalty and an
unpenalized mode.  All are nondecreasing on t >= 0 and constant beyond a
knot, so they reward exact zeros without biasing strong correlations.

An optional symmetric weight mask confines or reweights the penalty, e.g.
zero within known pathways and one across them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "PenaltySpec",
    "penalty_value",
    "penalty_derivative",
    "penalty_sum",
    "validate_mask",
]

_FAMILIES = ("none", "l1", "scad", "mcp")

# Conventional shape defaults: SCAD a = 3.7, MCP gamma = 3.0.
_DEFAULT_SHAPE = {"scad": 3.7, "mcp": 3.0}


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty family, level, shape, and optional weight mask.

    Parameters
    ----------
    family : str
        One of "none", "l1", "scad", "mcp".
    lam : float
        Penalty level lambda >= 0.
    shape : float, optional
        SCAD a (> 2) or MCP gamma (> 1).  Defaults to 3.7 / 3.0; ignored
        for "none" and "l1".
    mask : ndarray, optional
        Symmetric nonnegative d x d weight matrix with zero diagonal.
        Entry (i, j) multiplies the penalty on that correlation.
    """

    family: str
    lam: float = 0.0
    shape: float | None = None
    mask: NDArray | None = field(default=None)

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(
                f"unknown penalty family {self.family!r}; expected one of {_FAMILIES}"
            )
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"lam must be finite and >= 0, got {self.lam}")
        shape = self.shape
        if shape is None and self.family in _DEFAULT_SHAPE:
            shape = _DEFAULT_SHAPE[self.family]
            object.__setattr__(self, "shape", shape)
        if self.family == "scad" and not shape > 2.0:
            raise ValueError(f"SCAD shape a must be > 2, got {shape}")
        if self.family == "mcp" and not shape > 1.0:
            raise ValueError(f"MCP shape gamma must be > 1, got {shape}")
        if self.mask is not None:
            object.__setattr__(self, "mask", validate_mask(self.mask))


def validate_mask(mask: NDArray) -> NDArray[np.float64]:
    """Check a penalty weight mask: square, symmetric, nonnegative, zero diagonal."""
    mask = np.asarray(mask, dtype=np.float64)
    if mask.ndim != 2 or mask.shape[0] != mask.shape[1]:
        raise ValueError(f"mask must be square, got shape {mask.shape}")
    if not np.all(np.isfinite(mask)):
        raise ValueError("mask contains NaN or infinite entries")
    if not np.array_equal(mask, mask.T):
        raise ValueError("mask must be symmetric")
    if np.any(mask < 0):
        raise ValueError("mask entries must be nonnegative")
    if np.any(np.diag(mask) != 0):
        raise ValueError("mask diagonal must be zero")
    return mask


def penalty_value(spec: PenaltySpec, t):
    """Evaluate the scalar penalty p_lambda(t) for t >= 0 (elementwise).

    Closed forms, with lam = lambda and the family shape parameter:

    - l1:    lam * t
    - scad:  lam * t                           for t <= lam
             (2*a*lam*t - t^2 - lam^2)
               / (2*(a - 1))                   for lam < t <= a*lam
             lam^2 * (a + 1) / 2               for t > a*lam
    - mcp:   lam * t - t^2 / (2*gamma)         for t <= gamma*lam
             gamma * lam^2 / 2                 for t > gamma*lam
    - none:  0
    """
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError("penalty argument t must be nonnegative")
    lam = spec.lam
    if spec.family == "none" or lam == 0.0:
        return np.zeros_like(t)[()]
    if spec.family == "l1":
        return (lam * t)[()]
    if spec.family == "scad":
        a = spec.shape
        return np.piecewise(
            t,
            [t <= lam, (t > lam) & (t <= a * lam)],
            [
                lambda u: lam * u,
                lambda u: (2 * a * lam * u - u**2 - lam**2) / (2 * (a - 1)),
                lam**2 * (a + 1) / 2,
            ],
        )[()]
    # mcp
    g = spec.shape
    return np.piecewise(
        t,
        [t <= g * lam],
        [lambda u: lam * u - u**2 / (2 * g), g * lam**2 / 2],
    )[()]


def penalty_derivative(spec: PenaltySpec, t):
    """Derivative p'_lambda(t) for t >= 0 (elementwise; one-sided at knots).

    Zero on each flat tail: SCAD for t > a*lam, MCP for t > gamma*lam.
    """
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError("penalty argument t must be nonnegative")
    lam = spec.lam
    if spec.family == "none" or lam == 0.0:
        return np.zeros_like(t)[()]
    if spec.family == "l1":
        return np.full_like(t, lam)[()]
    if spec.family == "scad":
        a = spec.shape
        return np.piecewise(
            t,
            [t <= lam, (t > lam) & (t <= a * lam)],
            [lam, lambda u: (a * lam - u) / (a - 1), 0.0],
        )[()]
    g = spec.shape
    return np.piecewise(t, [t <= g * lam], [lambda u: lam - u / g, 0.0])[()]


def penalty_sum(spec: PenaltySpec, C: NDArray) -> float:
    """Total penalty over the off-diagonal entries of a symmetric matrix.

    Sums mask_ij * p_lambda(|C_ij|) over ordered pairs i != j, which double
    counts each unordered pair; equivalently 2 * sum over i < j.
    """
    C = np.asarray(C, dtype=np.float64)
    d = C.shape[0]
    if spec.family == "none" or spec.lam == 0.0:
        return 0.0
    if spec.mask is not None and spec.mask.shape != C.shape:
        raise ValueError(
            f"mask shape {spec.mask.shape} does not match matrix shape {C.shape}"
        )
    vals = penalty_value(spec, np.abs(C))
    off = ~np.eye(d, dtype=bool)
    if spec.mask is not None:
        vals = vals * spec.mask
    return float(np.sum(vals[off]))
