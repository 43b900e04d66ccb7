"""
Complex and block-real linear algebra used by every other module.

Complex matrices are kept as plain complex ``ndarray`` objects. The real
block form

    [[Re A, -Im A],
     [Im A,  Re A]]

is what a crossbar actually stores, and vectors are stacked as
``[Re v; Im v]``. Both are computed on demand.
"""

import warnings

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, SingularMatrixError

__all__ = [
    "as_complex_matrix",
    "gram",
    "expand_matrix",
    "expand_vector",
    "collapse_vector",
    "solve_dense",
    "min_eigenvalue_sym",
]


def as_complex_matrix(a, name="matrix"):
    """Validate and return ``a`` as a finite 2-D complex array."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInputError(f"{name} has a zero dimension: {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains NaN or Inf")
    return arr


def gram(H):
    """Return the Gram matrix ``H @ H^H`` of a K x M channel (M >= K)."""
    H = as_complex_matrix(H, "H")
    K, M = H.shape
    if M < K:
        raise InvalidInputError(f"need M >= K, got K={K}, M={M}")
    Z = H @ H.conj().T
    # enforce exact Hermitian symmetry against rounding in the product
    return 0.5 * (Z + Z.conj().T)


def expand_matrix(A):
    """Real 2p x 2q block form of a complex p x q matrix."""
    A = as_complex_matrix(A, "A")
    re, im = A.real, A.imag
    return np.block([[re, -im], [im, re]])


def expand_vector(v):
    """Stack a complex vector (or the columns of a batch) as [Re; Im]."""
    arr = np.asarray(v, dtype=complex)
    if arr.ndim not in (1, 2) or arr.shape[0] == 0:
        raise InvalidInputError(f"vector must be 1-D or 2-D and non-empty, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("vector contains NaN or Inf")
    return np.concatenate([arr.real, arr.imag], axis=0)


def collapse_vector(w):
    """Inverse of :func:`expand_vector`."""
    arr = np.asarray(w, dtype=float)
    if arr.ndim not in (1, 2):
        raise InvalidInputError(f"vector must be 1-D or 2-D, got {arr.shape}")
    n = arr.shape[0]
    if n == 0 or n % 2:
        raise InvalidInputError(f"expanded vector length must be even and non-zero, got {n}")
    half = n // 2
    return arr[:half] + 1j * arr[half:]


def solve_dense(A, b):
    """
    Solve the real square system ``A x = b`` by LU factorization.

    ``b`` may be a vector or an n x m block of right-hand sides.

    Raises
    ------
    SingularMatrixError
        If ``A`` is singular or so ill-conditioned that LAPACK flags it.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise InvalidInputError(f"A must be square and non-empty, got {A.shape}")
    if b.shape[0] != A.shape[0]:
        raise InvalidInputError(f"b has {b.shape[0]} rows, A has {A.shape[0]}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise InvalidInputError("non-finite entries in linear system")
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            return scipy.linalg.solve(A, b)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
            raise SingularMatrixError(str(exc)) from exc


def _is_positive_definite(A):
    try:
        np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        return False
    return True


def min_eigenvalue_sym(A, rtol=1e-10):
    """
    Smallest eigenvalue of the symmetric part of a real matrix.

    The eigenvalue is bracketed by Gershgorin discs and then located by
    bisection on the inertia of ``A - t I``: a Cholesky factorization exists
    exactly when ``t`` lies below the smallest eigenvalue. Unlike inverse
    iteration at shift zero, this finds the algebraically smallest
    eigenvalue of indefinite matrices as well.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise InvalidInputError(f"A must be square and non-empty, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("A contains NaN or Inf")
    S = 0.5 * (A + A.T)
    n = S.shape[0]
    if n == 1:
        return float(S[0, 0])

    diag = np.diag(S)
    radius = np.abs(S).sum(axis=1) - np.abs(diag)
    lo = float(np.min(diag - radius))
    hi = float(np.min(diag))  # Rayleigh quotient of a unit vector bounds it above
    scale = max(float(np.abs(S).max()), np.finfo(float).tiny)
    eye = np.eye(n)

    atol = rtol * scale
    # lo may coincide with the eigenvalue (e.g. identity); step just below it
    lo -= atol
    while hi - lo > max(atol, rtol * abs(hi)):
        mid = 0.5 * (lo + hi)
        if _is_positive_definite(S - mid * eye):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
