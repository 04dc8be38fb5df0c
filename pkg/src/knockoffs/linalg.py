"""Dense linear-algebra kernels shared by the rest of the package.

All routines are thin, deterministic wrappers around LAPACK (via
numpy/scipy) with the error semantics the higher-level modules rely on.
Matrices are plain ``numpy.ndarray``; symmetric matrices and orthonormal
bases are validated with :func:`check_symmetric` / :func:`check_orthonormal`
rather than wrapped in dedicated classes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import (
    NotPositiveDefiniteError,
    NumericalFailureError,
    RankDeficientError,
)

__all__ = [
    "Tolerances",
    "TOL",
    "gram",
    "min_eig",
    "null_complement",
    "solve_spd",
    "thin_svd",
    "check_symmetric",
    "check_orthonormal",
]


@dataclass(frozen=True)
class Tolerances:
    """Absolute tolerances for unit-normalized inputs."""

    symmetry: float = 1e-12
    orthonormal: float = 1e-10
    spd_residual: float = 1e-10
    svd_reconstruction: float = 1e-9
    eig_accuracy: float = 1e-10
    knockoff_invariant: float = 1e-8
    psd_feasibility: float = 1e-8
    zero_s: float = 1e-10


#: Package-wide default tolerances.
TOL = Tolerances()


def check_symmetric(a: np.ndarray, tol: float = TOL.symmetry) -> None:
    """Raise ``ValueError`` unless ``a`` is square, finite, and symmetric."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a - a.T).max() > tol * scale:
        raise ValueError("matrix is not symmetric within tolerance")


def check_orthonormal(q: np.ndarray, tol: float = TOL.orthonormal) -> None:
    """Raise ``ValueError`` unless the columns of ``q`` are orthonormal."""
    q = np.asarray(q)
    if q.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {q.shape}")
    m = q.shape[1]
    if m == 0:
        return
    err = np.abs(q.T @ q - np.eye(m)).max()
    if err > tol:
        raise ValueError(f"columns not orthonormal: max deviation {err:.3e}")


def gram(x: np.ndarray) -> np.ndarray:
    """Exactly symmetric Gram matrix ``x.T @ x``."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("design matrix has non-finite entries")
    g = x.T @ x
    return (g + g.T) / 2.0


def min_eig(s: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    s = np.asarray(s, dtype=float)
    if s.shape[0] == 0:
        raise ValueError("empty matrix has no eigenvalues")
    try:
        vals = scipy.linalg.eigvalsh(s)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NumericalFailureError(f"symmetric eigensolver failed: {exc}") from exc
    return float(vals[0])


def _economy_qr_rank_check(x: np.ndarray) -> np.ndarray:
    """Economy QR of ``x`` with a rank check on the R diagonal.

    Returns the n-by-p orthonormal factor Q.
    """
    n, p = x.shape
    q, r = scipy.linalg.qr(x, mode="economic")
    diag = np.abs(np.diag(r))
    scale = diag.max() if diag.size else 0.0
    if scale == 0.0 or diag.min() <= max(n, p) * np.finfo(float).eps * scale:
        raise RankDeficientError(
            f"matrix of shape {x.shape} is rank deficient (min |R_ii| = {diag.min() if diag.size else 0.0:.3e})"
        )
    return q


def null_complement(x: np.ndarray, m: int) -> np.ndarray:
    """Deterministic n-by-m orthonormal basis with ``U.T @ x == 0``.

    Built from a column-pivoted QR of the orthogonal-projector complement
    ``I - Q Q.T`` (Q from the economy QR of ``x``), so the same ``x`` always
    yields the same basis.

    Raises
    ------
    RankDeficientError
        If ``x`` does not have full column rank.
    ValueError
        If ``m`` exceeds ``n - p``.
    """
    x = np.asarray(x, dtype=float)
    n, p = x.shape
    if m < 0 or m > n - p:
        raise ValueError(f"requested {m} complement columns but only {n - p} exist")
    if m == 0:
        _economy_qr_rank_check(x)
        return np.zeros((n, 0))
    qx = _economy_qr_rank_check(x)
    proj = np.eye(n) - qx @ qx.T
    qp, _, _ = scipy.linalg.qr(proj, mode="economic", pivoting=True)
    return np.ascontiguousarray(qp[:, :m])


def solve_spd(s: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``s @ x = b`` for symmetric positive definite ``s`` via Cholesky.

    Raises
    ------
    NotPositiveDefiniteError
        If the Cholesky factorization fails.
    """
    s = np.asarray(s, dtype=float)
    b = np.asarray(b, dtype=float)
    try:
        c, low = scipy.linalg.cho_factor(s, lower=True)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NotPositiveDefiniteError(f"Cholesky factorization failed: {exc}") from exc
    return scipy.linalg.cho_solve((c, low), b)


def thin_svd(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD ``a = U @ diag(d) @ V.T`` with ``d`` nonincreasing.

    ``a`` must have at least as many rows as columns.  Returns ``(U, d, V)``
    where both ``U`` (n-by-k) and ``V`` (k-by-k) have orthonormal columns.
    """
    a = np.asarray(a, dtype=float)
    if a.shape[0] < a.shape[1]:
        raise ValueError(f"thin_svd expects n >= cols, got shape {a.shape}")
    try:
        u, d, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"SVD failed to converge: {exc}") from exc
    return u, d, vt.T
