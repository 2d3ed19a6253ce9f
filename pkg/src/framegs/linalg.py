"""Small dense linear-algebra kernel over real and complex scalars.

Vectors and matrices are plain numpy arrays.  The scalar field is carried
by the dtype (float64 for real, complex128 for complex) and both fields go
through the same code paths: ``conj`` on a float64 array is a no-op, so no
branching is needed.  All inputs are validated to be finite; NaN or Inf
raises :class:`~framegs.errors.NonFiniteError` instead of propagating.

The eigensolver is a cyclic Jacobi iteration.  Problem sizes here are tiny
(dimension a few dozen at most), where Jacobi is simple, accurate and
backward stable.
"""

import numpy as np

from .errors import (
    DimensionMismatchError,
    JacobiConvergenceError,
    NonFiniteError,
    NotHermitianError,
    RankDeficientError,
)

HERMITIAN_TOL = 1e-12     # relative to the largest entry magnitude
JACOBI_SWEEP_TOL = 1e-14  # off-diagonal Frobenius, relative to ||M||_F
JACOBI_MAX_SWEEPS = 100


def as_field_array(x, name="array"):
    """Coerce ``x`` to a float64 or complex128 ndarray and reject non-finite
    entries."""
    arr = np.asarray(x)
    if np.issubdtype(arr.dtype, np.complexfloating):
        arr = arr.astype(np.complex128, copy=False)
    elif np.issubdtype(arr.dtype, np.number) or arr.dtype == bool:
        arr = arr.astype(np.float64, copy=False)
    else:
        raise TypeError(f"{name}: expected numeric data, got dtype {arr.dtype}")
    if arr.size and not np.isfinite(arr).all():
        raise NonFiniteError(f"{name}: contains NaN or Inf")
    return arr


def _as_vector(x, name="vector"):
    arr = as_field_array(x, name)
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise DimensionMismatchError(f"{name}: expected a 1-d array, got shape {arr.shape}")
    return arr


def _as_square(x, name="matrix"):
    arr = as_field_array(x, name)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise DimensionMismatchError(f"{name}: expected a square matrix, got shape {arr.shape}")
    return arr


def inner(u, v):
    """Inner product, linear in the first argument and conjugate-linear in
    the second: ``sum_j u[j] * conj(v[j])``."""
    u = _as_vector(u, "u")
    v = _as_vector(v, "v")
    if u.shape != v.shape:
        raise DimensionMismatchError(f"inner: shapes {u.shape} and {v.shape} differ")
    if u.dtype != v.dtype:
        raise DimensionMismatchError("inner: operands must share one scalar field")
    return np.dot(u, v.conj()).item()


def norm(v):
    """Euclidean norm, sqrt(inner(v, v))."""
    return float(np.linalg.norm(_as_vector(v)))


def check_hermitian(matrix, tol=HERMITIAN_TOL):
    """Raise unless ``matrix`` equals its conjugate transpose within
    ``tol`` times the largest entry magnitude."""
    a = _as_square(matrix)
    scale = np.abs(a).max()
    dev = np.abs(a - a.conj().T).max()
    if dev > tol * max(scale, 1e-300):
        raise NotHermitianError(
            f"matrix deviates from Hermitian by {dev:.3e} (scale {scale:.3e})"
        )
    return a


def hermitian_eigen(matrix, sweep_tol=JACOBI_SWEEP_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with eigenvalues ``w`` ascending and the columns of
    ``V`` the corresponding orthonormal eigenvectors, so that
    ``matrix @ V[:, i] == w[i] * V[:, i]``.

    Sweeps stop once the off-diagonal Frobenius mass falls below
    ``sweep_tol`` times the Frobenius norm of the input, or after
    ``max_sweeps`` full sweeps (which raises, but is unreachable for the
    matrix sizes this package handles).
    """
    a = check_hermitian(matrix)
    d = a.shape[0]
    A = 0.5 * (a + a.conj().T)  # exact-Hermitian working copy
    V = np.eye(d, dtype=A.dtype)
    fro = np.linalg.norm(A)
    if d == 1 or fro == 0.0:
        w = np.diag(A).real.copy()
        order = np.argsort(w, kind="stable")
        return w[order], V[:, order]

    threshold = sweep_tol * fro
    for _ in range(max_sweeps):
        off = _offdiag_norm(A)
        if off <= threshold:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                b = abs(apq)
                if b <= 1e-280 * fro:
                    # below any representable rotation angle; annihilate
                    A[p, q] = 0.0
                    A[q, p] = 0.0
                    continue
                e = apq / b  # unit phase; +-1.0 in the real case
                tau = (A[q, q].real - A[p, p].real) / (2.0 * b)
                # smaller root of t^2 + 2*tau*t - 1 = 0
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0.0 else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                ce = c * e
                se = s * e
                rowp = A[p, :].copy()
                rowq = A[q, :].copy()
                A[p, :] = ce.conjugate() * rowp - s * rowq
                A[q, :] = se.conjugate() * rowp + c * rowq
                colp = A[:, p].copy()
                colq = A[:, q].copy()
                A[:, p] = ce * colp - s * colq
                A[:, q] = se * colp + c * colq
                A[p, q] = 0.0
                A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = ce * vp - s * vq
                V[:, q] = se * vp + c * vq
    if _offdiag_norm(A) > threshold:
        raise JacobiConvergenceError(
            f"off-diagonal mass {_offdiag_norm(A):.3e} above {threshold:.3e} "
            f"after {max_sweeps} sweeps"
        )
    w = np.diag(A).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def _offdiag_norm(A):
    # summed entrywise; the subtraction ||A||_F^2 - ||diag||^2 cancels badly
    off = A.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def inv_sqrt(matrix, floor=None):
    """Inverse square root of a Hermitian positive-definite matrix.

    Returns ``R = V diag(w**-0.5) V*`` so that ``R @ matrix @ R`` is the
    identity.  ``floor`` is the positivity threshold on eigenvalues; the
    default is 1e-12 times the largest eigenvalue.  An eigenvalue at or
    below the floor raises :class:`RankDeficientError`.
    """
    w, V = hermitian_eigen(matrix)
    lam_max = w[-1]
    if floor is None:
        floor = 1e-12 * max(lam_max, 0.0)
    if w[0] <= floor:
        raise RankDeficientError(
            f"eigenvalue {w[0]:.3e} at or below floor {floor:.3e}: "
            "operator is numerically rank deficient"
        )
    R = (V * w ** -0.5) @ V.conj().T
    return 0.5 * (R + R.conj().T)
