"""
A tour of the angle parameterization of correlation matrices
============================================================

Every d x d correlation matrix corresponds to a vector of d(d-1)/2 angles
through its unit-row Cholesky factor, and any real vector at all can be
folded back into that angle box.  This script walks the basic moves:
matrix -> angles -> matrix, wrapping arbitrary vectors, and what the
wrap does case by case.
"""

import numpy as np

from corrsearch import (
    angles_to_corr,
    corr_to_angles,
    num_angles,
    random_corr,
    wrap_angles,
)

rng = np.random.default_rng(0)

# --- a round trip ---------------------------------------------------------

d = 4
C = random_corr(d, rng)
print("a random 4x4 correlation matrix:")
print(np.round(C, 4))

omega = corr_to_angles(C)
print("\nits %d angles:" % num_angles(d))
print(np.round(omega, 4))

back = angles_to_corr(omega)
print("\nround trip error: %.2e" % np.max(np.abs(back - C)))

# --- feasibility for free --------------------------------------------------

# The point of the parameterization: ANY vector, wrapped, gives a valid
# correlation matrix.  No projection, no eigenvalue clipping.
wild = rng.normal(scale=50.0, size=num_angles(d))
C2 = angles_to_corr(wrap_angles(wild, d))
print("\nfrom a wild vector (entries around +-50):")
print("  diagonal exactly one:", bool(np.all(np.diag(C2) == 1.0)))
print("  symmetric exactly:   ", bool(np.array_equal(C2, C2.T)))
print("  smallest eigenvalue:  %.3e" % np.linalg.eigvalsh(C2)[0])

# --- what wrapping does ----------------------------------------------------

# Angles come in four flavors with different ranges.  For d = 3 the vector
# is (row-2 angle, leading angle of row 3, final angle of row 3), with
# ranges [-pi/2, pi/2), [0, pi/2], and [0, 2*pi).
phi = np.array([2.0, 2.0, -1.0])
print("\nwrap of [2.0, 2.0, -1.0] for d=3:", np.round(wrap_angles(phi, 3), 4))
# the first entry folded onto the half-open row-2 range, the second
# reflected back into [0, pi/2], the third shifted up by 2*pi
