"""
Dense symmetric-positive-definite helpers shared by both estimators.

Everything goes through one lower Cholesky factor; no explicit inverse is
formed except for the diagonal of M^{-1}, which is read off L^{-1}.
"""
import numpy as np
from scipy.linalg import cholesky, solve_triangular, LinAlgError
from scipy.linalg.lapack import dtrtri

from mcrard.exceptions import NotSPD, DimensionMismatch

SYMMETRY_RTOL = 1e-10
PIVOT_RTOL = 1e-12

def check_finite(arr, name="array"):
    """
    Raises ValueError if `arr` has NaN/Inf entries.
    """
    arr = np.asarray(arr, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries.")
    return arr

def _check_spd_input(M):
    M = check_finite(M, "M")
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"M must be square, got shape {M.shape}.")
    norm_inf = np.abs(M).sum(axis=1).max() if M.size else 0.0
    asym = np.abs(M - M.T).max() if M.size else 0.0
    if asym > SYMMETRY_RTOL * max(norm_inf, np.finfo(float).tiny):
        raise NotSPD(f"M is not symmetric (max asymmetry {asym:.3e}).")
    return M

def cholesky_lower(M, check=True):
    """
    Lower Cholesky factor L with M = L L^T.

    Args:
        M (np.ndarray): (D, D) symmetric positive-definite
        check (bool): validate finiteness, shape and symmetry first. The
            estimators pass False for matrices they assembled themselves.
    Returns:
        L (np.ndarray): (D, D) lower triangular
    Raises:
        NotSPD: a pivot is non-positive or below 1e-12 * max(diag(M))
    """
    M = _check_spd_input(M) if check else M
    try:
        L = cholesky(M, lower=True, check_finite=False)
    except LinAlgError as exc:
        raise NotSPD(f"Cholesky factorization failed: {exc}") from exc
    pivots = np.diag(L) ** 2
    if not np.all(np.isfinite(pivots)):
        raise NotSPD("Cholesky factor has non-finite pivots.")
    max_diag = np.max(np.diag(M))
    if np.any(pivots < PIVOT_RTOL * max_diag):
        d = int(np.argmin(pivots))
        raise NotSPD(f"Near-singular pivot {pivots[d]:.3e} at index {d} "
                     f"(max diagonal {max_diag:.3e}).")
    return L

def cholesky_solve(L, b):
    """
    Solves (L L^T) x = b given the lower factor. `b` may be a vector or a
    matrix of right-hand sides.
    """
    y = solve_triangular(L, b, lower=True, check_finite=False)
    return solve_triangular(L.T, y, lower=False, check_finite=False)

def spd_solve(M, b):
    """
    Solves M x = b for symmetric positive-definite M.

    Args:
        M (np.ndarray): (D, D)
        b (np.ndarray): (D,)
    Returns:
        x (np.ndarray): (D,)
    """
    b = check_finite(b, "b")
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or b.shape[0] != M.shape[0]:
        raise DimensionMismatch(f"Cannot solve a system of shape {M.shape} "
                                f"with a right-hand side of shape {b.shape}.")
    L = cholesky_lower(M)
    return cholesky_solve(L, b)

def inverse_diagonal_from_factor(L):
    """
    diag(M^{-1}) from the lower factor of M: (M^{-1})_dd is the squared
    column norm of L^{-1}.
    """
    L_inv, info = dtrtri(L, lower=1)
    if info != 0:
        raise NotSPD(f"Triangular inverse failed (info={info}).")
    return np.sum(L_inv ** 2, axis=0)

def spd_inverse_diagonal(M):
    """
    Diagonal of M^{-1} for symmetric positive-definite M. Every entry is > 0.
    """
    return inverse_diagonal_from_factor(cholesky_lower(M))

def quadratic_diagonal_from_factor(L, B):
    """
    diag(B^T M^{-1} B) for M = L L^T, i.e. the squared column norms of
    L^{-1} B. Used by the Woodbury form of the Gaussian posterior.
    """
    V = solve_triangular(L, B, lower=True, check_finite=False)
    return np.sum(V ** 2, axis=0)
