"""Angular coordinates for the manifold of correlation matrices.

A d x d correlation matrix C (symmetric positive definite, unit diagonal)
factors uniquely as C = L L' with L lower triangular, positive diagonal and
unit-norm rows.  Writing each row of L in spherical coordinates identifies C
with a vector of N = d(d-1)/2 angles, and a componentwise periodic wrapping
map folds all of R^N onto the angle domain.  Composing the two gives a
global, unconstrained coordinate system: every real N-vector corresponds to
a valid correlation matrix, and every strictly positive definite correlation
matrix corresponds to an interior angle vector.

Angles are stored row-major: row m of L (m = 2..d) contributes m-1 angles
(omega_{m,1}, ..., omega_{m,m-1}), flattened in that order.  The first angle
of row 2 lives in [-pi/2, pi/2); for m >= 3 the leading angle lives in
[0, pi/2], interior angles in [0, pi], and the final angle in [0, 2*pi).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "num_angles",
    "dim_from_num_angles",
    "flat_index",
    "rowcol_of",
    "wrap_cases",
    "wrap_periods",
    "wrap_angles",
    "wrap_scalar",
    "angles_to_cholesky",
    "angles_to_corr",
    "corr_to_angles",
    "validate_corr",
    "random_angles",
    "random_corr",
    "CorrelationError",
]

# Wrap-case codes, one per angle coordinate.
CASE_ROW2 = 0      # m = 2, k = 1: sawtooth onto [-pi/2, pi/2), period pi
CASE_LEADING = 1   # m >= 3, k = 1: reflection onto [0, pi/2], period pi
CASE_INTERIOR = 2  # m >= 3, 2 <= k <= m-2: reflection onto [0, pi], period 2*pi
CASE_FINAL = 3     # m >= 3, k = m-1: sawtooth onto [0, 2*pi), period 2*pi

_PERIOD_BY_CASE = (math.pi, math.pi, 2.0 * math.pi, 2.0 * math.pi)


class CorrelationError(ValueError):
    """Raised when a matrix fails correlation-matrix validation.

    The ``violations`` attribute lists every failed check, not just the
    first one encountered.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def num_angles(d: int) -> int:
    """Number of angle coordinates for dimension d, N = d(d-1)/2."""
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    return d * (d - 1) // 2


def dim_from_num_angles(n: int) -> int:
    """Invert ``num_angles``: the d with d(d-1)/2 == n, or raise."""
    d = (1 + math.isqrt(1 + 8 * n)) // 2
    if d < 2 or d * (d - 1) // 2 != n:
        raise ValueError(f"{n} is not d(d-1)/2 for any integer d >= 2")
    return d


def flat_index(m: int, k: int) -> int:
    """Flat 0-based position of angle omega_{m,k} (m >= 2, 1 <= k <= m-1)."""
    if m < 2 or not 1 <= k <= m - 1:
        raise ValueError(f"no angle at (m={m}, k={k})")
    return (m - 1) * (m - 2) // 2 + (k - 1)


def rowcol_of(n: int) -> tuple[int, int]:
    """Row/position labels (m, k) of the angle at flat index n (0-based)."""
    if n < 0:
        raise ValueError(f"flat index must be >= 0, got {n}")
    m = (1 + math.isqrt(1 + 8 * n)) // 2 + 1
    k = n - (m - 1) * (m - 2) // 2 + 1
    return m, k


@lru_cache(maxsize=None)
def wrap_cases(d: int) -> NDArray[np.int8]:
    """Wrap-case code for each of the N angle coordinates at dimension d."""
    codes = np.empty(num_angles(d), dtype=np.int8)
    for n in range(codes.size):
        m, k = rowcol_of(n)
        if m == 2:
            codes[n] = CASE_ROW2
        elif k == 1:
            codes[n] = CASE_LEADING
        elif k == m - 1:
            codes[n] = CASE_FINAL
        else:
            codes[n] = CASE_INTERIOR
    codes.setflags(write=False)
    return codes


@lru_cache(maxsize=None)
def wrap_periods(d: int) -> NDArray[np.float64]:
    """Period of the wrapping map in each coordinate (pi or 2*pi)."""
    periods = np.array([_PERIOD_BY_CASE[c] for c in wrap_cases(d)])
    periods.setflags(write=False)
    return periods


def wrap_angles(theta: NDArray, d: int | None = None) -> NDArray[np.float64]:
    """Fold an arbitrary real vector onto the angle domain.

    Applies the componentwise periodic map that sends R^N onto the closed
    angle domain: sawtooth onto [-pi/2, pi/2) for the row-2 angle,
    reflection onto [0, pi/2] for leading angles, reflection onto [0, pi]
    for interior angles, and reduction mod 2*pi for final angles.  The map
    is idempotent and periodic (period pi for the first two cases, 2*pi
    for the rest).

    Parameters
    ----------
    theta : ndarray, shape (N,)
        Unconstrained angle vector, N = d(d-1)/2.
    d : int, optional
        Matrix dimension; inferred from ``len(theta)`` when omitted.

    Returns
    -------
    ndarray, shape (N,)
        The wrapped vector, inside the closed angle domain.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if theta.ndim != 1:
        raise ValueError(f"expected a 1-d angle vector, got shape {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("angle vector contains NaN or infinite entries")
    if d is None:
        d = dim_from_num_angles(theta.size)
    elif theta.size != num_angles(d):
        raise ValueError(
            f"angle vector has {theta.size} entries, expected {num_angles(d)} for d={d}"
        )
    codes = wrap_cases(d)
    out = np.empty_like(theta)

    half_pi = 0.5 * np.pi
    two_pi = 2.0 * np.pi

    sel = codes == CASE_ROW2
    if np.any(sel):
        out[sel] = np.mod(theta[sel] + half_pi, np.pi) - half_pi
    sel = codes == CASE_LEADING
    if np.any(sel):
        out[sel] = half_pi - np.abs(np.mod(theta[sel], np.pi) - half_pi)
    sel = codes == CASE_INTERIOR
    if np.any(sel):
        out[sel] = np.pi - np.abs(np.mod(theta[sel], two_pi) - np.pi)
    sel = codes == CASE_FINAL
    if np.any(sel):
        out[sel] = np.mod(theta[sel], two_pi)
    return out


def wrap_scalar(x: float, code: int) -> float:
    """Wrap a single coordinate given its case code.

    Bit-identical to the corresponding component of ``wrap_angles``; used in
    the search hot path where one coordinate changes at a time.
    """
    half_pi = 0.5 * math.pi
    if code == CASE_ROW2:
        return (x + half_pi) % math.pi - half_pi
    if code == CASE_LEADING:
        return half_pi - abs((x % math.pi) - half_pi)
    if code == CASE_INTERIOR:
        return math.pi - abs((x % (2.0 * math.pi)) - math.pi)
    if code == CASE_FINAL:
        return x % (2.0 * math.pi)
    raise ValueError(f"unknown wrap case code {code}")


@lru_cache(maxsize=None)
def _scatter_indices(d: int):
    # Precomputed fancy indices for angles_to_cholesky.
    # W[row, pos] holds omega_{m,k} with row = m-1, pos = k-1.
    rows = []
    cols = []
    for n in range(num_angles(d)):
        m, k = rowcol_of(n)
        rows.append(m - 1)
        cols.append(k - 1)
    w_rows = np.array(rows)
    w_cols = np.array(cols)
    # L[r, r-j] = A[r, j] for r >= 1, 0 <= j <= r-1
    l_rows = []
    l_cols = []
    a_rows = []
    a_cols = []
    for r in range(1, d):
        for j in range(r):
            l_rows.append(r)
            l_cols.append(r - j)
            a_rows.append(r)
            a_cols.append(j)
    return (
        w_rows,
        w_cols,
        np.array(l_rows),
        np.array(l_cols),
        np.array(a_rows),
        np.array(a_cols),
    )


def angles_to_cholesky(omega: NDArray) -> NDArray[np.float64]:
    """Build the unit-row lower-triangular factor from an angle vector.

    Row m of the result is the point on the unit hemisphere with spherical
    coordinates (omega_{m,1}, ..., omega_{m,m-1}):

        l_{m,m}   = cos omega_{m,1}
        l_{m,m-j} = sin omega_{m,1} ... sin omega_{m,j} * cos omega_{m,j+1}
        l_{m,1}   = sin omega_{m,1} ... sin omega_{m,m-1}

    Every row has unit Euclidean norm by construction.

    Parameters
    ----------
    omega : ndarray, shape (N,)
        Angle vector, N = d(d-1)/2.

    Returns
    -------
    ndarray, shape (d, d)
        Lower-triangular factor with l_{1,1} = 1.
    """
    omega = np.asarray(omega, dtype=np.float64)
    d = dim_from_num_angles(omega.size)
    w_rows, w_cols, l_rows, l_cols, a_rows, a_cols = _scatter_indices(d)

    W = np.zeros((d, d))
    W[w_rows, w_cols] = omega
    S = np.sin(W)
    C = np.cos(W)
    P = np.cumprod(S, axis=1)

    A = np.empty((d, d))
    A[:, 0] = C[:, 0]
    A[:, 1:] = P[:, :-1] * C[:, 1:]

    L = np.zeros((d, d))
    L[0, 0] = 1.0
    L[l_rows, l_cols] = A[a_rows, a_cols]
    r = np.arange(1, d)
    L[r, 0] = P[r, r - 1]
    return L


def angles_to_corr(omega: NDArray) -> NDArray[np.float64]:
    """Map an angle vector to its correlation matrix.

    Computes L L' from the unit-row Cholesky factor and then enforces exact
    symmetry and an exact unit diagonal, so the output satisfies those two
    invariants to the last bit (eigenvalues remain >= -1e-12 numerically).

    Parameters
    ----------
    omega : ndarray, shape (N,)
        Angle vector, N = d(d-1)/2.  Use ``wrap_angles`` first if the
        vector may lie outside the angle domain.

    Returns
    -------
    ndarray, shape (d, d)
        Correlation matrix.
    """
    L = angles_to_cholesky(omega)
    C = L @ L.T
    C = 0.5 * (C + C.T)
    np.fill_diagonal(C, 1.0)
    return C


def corr_to_angles(C: NDArray) -> NDArray[np.float64]:
    """Recover the angle vector of a positive definite correlation matrix.

    Inverts ``angles_to_corr``: Cholesky-factor the matrix, normalize rows,
    and read each row's spherical coordinates back off the factor.  Angle
    k of row m satisfies tan(angle) = (norm of the row tail beyond entry
    k) / (entry k), so each one comes from a single atan2 call; this is
    algebraically the usual arccos of a ratio of sine products, but it
    stays accurate when those products nearly vanish, where the division
    form loses all precision.  The final angle of each row keeps its full
    [0, 2*pi) range through a signed atan2.  If a row tail is exactly
    zero, the remaining angles of that row come out 0 (they no longer
    influence the matrix).

    Parameters
    ----------
    C : ndarray, shape (d, d)
        Symmetric positive definite matrix with unit diagonal.

    Returns
    -------
    ndarray, shape (N,)
        Angle vector with ``angles_to_corr(omega)`` equal to C up to
        rounding.

    Raises
    ------
    ValueError
        If the matrix is not positive definite.
    """
    C = np.asarray(C, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {C.shape}")
    d = C.shape[0]
    try:
        L = np.linalg.cholesky(C)
    except np.linalg.LinAlgError as err:
        raise ValueError("matrix is not positive definite") from err
    # Unit-diagonal inputs already have unit rows; renormalize so slightly
    # off-scale inputs still round-trip through the angle domain.
    norms = np.sqrt(np.sum(L * L, axis=1))
    L = L / norms[:, None]

    omega = np.zeros(num_angles(d))
    omega[0] = math.atan2(L[1, 0], L[1, 1])
    pos = 1
    for m in range(3, d + 1):
        r = m - 1
        u = L[r, : r + 1][::-1]  # cos(angle 1), then the rest of the row
        tail = np.sqrt(np.cumsum((u * u)[::-1])[::-1])
        for k in range(1, m - 1):
            omega[pos + k - 1] = math.atan2(tail[k], u[k - 1])
        ang = math.atan2(u[m - 1], u[m - 2])
        if ang < 0.0:
            ang += 2.0 * math.pi
        omega[pos + m - 2] = ang
        pos += m - 1
    return omega


def validate_corr(M: NDArray, tol: float = 1e-8) -> NDArray[np.float64]:
    """Check a matrix against the correlation-matrix invariants.

    Parameters
    ----------
    M : ndarray, shape (d, d)
        Candidate matrix.
    tol : float
        Tolerance for symmetry and unit-diagonal deviations, and the strict
        lower bound required of the smallest eigenvalue.

    Returns
    -------
    ndarray, shape (d, d)
        A cleaned copy: exactly symmetrized, diagonal snapped to 1.

    Raises
    ------
    CorrelationError
        Listing every violated invariant (shape, finiteness, symmetry,
        unit diagonal, positive definiteness).
    """
    M = np.asarray(M, dtype=np.float64)
    violations = []
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise CorrelationError([f"expected a square matrix, got shape {M.shape}"])
    if not np.all(np.isfinite(M)):
        raise CorrelationError(["matrix contains NaN or infinite entries"])
    asym = np.max(np.abs(M - M.T))
    if asym > tol:
        violations.append(f"not symmetric: max |M - M'| = {asym:.3e} > tol {tol:.1e}")
    diag_err = np.max(np.abs(np.diag(M) - 1.0))
    if diag_err > tol:
        violations.append(
            f"diagonal not 1: max |M_ii - 1| = {diag_err:.3e} > tol {tol:.1e}"
        )
    sym = 0.5 * (M + M.T)
    min_eig = float(np.linalg.eigvalsh(sym)[0])
    if not min_eig > tol:
        violations.append(
            f"not positive definite: min eigenvalue {min_eig:.3e} <= tol {tol:.1e}"
        )
    if violations:
        raise CorrelationError(violations)
    out = sym
    np.fill_diagonal(out, 1.0)
    return out


def random_angles(d: int, rng: np.random.Generator) -> NDArray[np.float64]:
    """Draw an angle vector uniformly over the angle domain.

    Each coordinate is uniform over its own range; this is uniform on the
    coordinate chart, not the Haar measure on correlation matrices.
    """
    codes = wrap_cases(d)
    out = np.empty(codes.size)
    for case, lo, hi in (
        (CASE_ROW2, -0.5 * np.pi, 0.5 * np.pi),
        (CASE_LEADING, 0.0, 0.5 * np.pi),
        (CASE_INTERIOR, 0.0, np.pi),
        (CASE_FINAL, 0.0, 2.0 * np.pi),
    ):
        sel = codes == case
        out[sel] = rng.uniform(lo, hi, size=int(np.count_nonzero(sel)))
    return out


def random_corr(d: int, rng: np.random.Generator) -> NDArray[np.float64]:
    """Random correlation matrix via a chart-uniform angle draw."""
    return angles_to_corr(random_angles(d, rng))
