"""Construction of s-vectors and knockoff matrices.

A knockoff matrix ``Xt`` for a unit-column design ``X`` satisfies::

    Xt.T @ Xt == X.T @ X          (same Gram structure)
    X.T @ Xt  == X.T @ X - diag(s)

for a feasible gap vector ``s`` with ``0 <= s_i <= 1`` and
``diag(s) <= 2 X.T X`` in the semidefinite order.  Three s builders are
provided (equivariant, SDP, modified SDP with a positive floor), plus the
closed-form matrix construction and a localized variant that perturbs only
a subset of columns.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from .exceptions import (
    InfeasibleConstraintError,
    InfeasibleSError,
    InsufficientRowsError,
    NotPositiveDefiniteError,
    SdpFailureError,
)
from .linalg import TOL, check_symmetric, gram, min_eig, null_complement, solve_spd

__all__ = [
    "SMethod",
    "SVector",
    "KnockoffModel",
    "LocalizedKnockoffModel",
    "KnockoffReport",
    "s_equivariant",
    "s_sdp",
    "s_modified_sdp",
    "build_knockoff",
    "build_localized_knockoff",
    "validate_knockoff",
    "localized_mismatch",
    "swap_pairs",
]


class SMethod(str, Enum):
    EQUIVARIANT = "equi"
    SDP = "sdp"
    MODIFIED_SDP = "msdp"


@dataclass(frozen=True, eq=False)
class SVector:
    """Per-feature knockoff gaps plus the method that produced them."""

    s: np.ndarray
    method: SMethod | None

    def __len__(self) -> int:
        return self.s.shape[0]


@dataclass(frozen=True, eq=False)
class KnockoffModel:
    """A matched design/knockoff pair.

    ``U`` is an n-by-(n-2p) orthonormal complement of ``[X Xt]`` kept for
    noise estimation; it is empty when n == 2p.
    """

    X: np.ndarray
    Xtilde: np.ndarray
    s: SVector
    U: np.ndarray

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def sigma(self) -> np.ndarray:
        return gram(self.X)


@dataclass(frozen=True, eq=False)
class LocalizedKnockoffModel:
    """Knockoffs built for a column subset only (``Utilde_Q == U_Q``)."""

    U_P: np.ndarray
    U_Q: np.ndarray
    Utilde_P: np.ndarray
    s_P: np.ndarray


@dataclass(frozen=True)
class KnockoffReport:
    """Invariant norms of a knockoff model and a pass/fail at 1e-8."""

    gram_mismatch: float
    cross_mismatch: float
    complement_mismatch: float
    passed: bool
    zero_s: tuple[int, ...]


# --------------------------------------------------------------------------
# s-vector builders
# --------------------------------------------------------------------------


def s_equivariant(sigma: np.ndarray) -> SVector:
    """Uniform gaps ``s_i = min(1, 2 lambda_min(sigma))``."""
    sigma = np.asarray(sigma, dtype=float)
    check_symmetric(sigma, tol=1e-10)
    lam = min_eig(sigma)
    if lam <= 0:
        raise NotPositiveDefiniteError(f"Gram matrix is not PD (lambda_min = {lam:.3e})")
    value = min(1.0, 2.0 * lam)
    return SVector(np.full(sigma.shape[0], value), SMethod.EQUIVARIANT)


def s_sdp(sigma: np.ndarray) -> SVector:
    """Maximize ``sum(s)`` subject to ``diag(s) <= 2 sigma`` and ``0 <= s_i <= 1``.

    Solved with a log-det barrier Newton method on the p-dimensional
    variable; may fall back toward the (always feasible) equivariant
    solution if the barrier solve stalls, in which case the reported
    method reflects the fallback.
    """
    sigma = np.asarray(sigma, dtype=float)
    check_symmetric(sigma, tol=1e-10)
    lam = min_eig(sigma)
    if lam <= 0:
        raise NotPositiveDefiniteError(f"Gram matrix is not PD (lambda_min = {lam:.3e})")
    equi = np.full(sigma.shape[0], min(1.0, 2.0 * lam))
    s, fell_back = _solve_with_backoff(2.0 * sigma, 0.0, 1.0, equi)
    return SVector(s, SMethod.EQUIVARIANT if fell_back else SMethod.SDP)


def s_modified_sdp(sigma: np.ndarray, alpha: float = 0.5, beta: float = 0.75) -> SVector:
    """SDP gaps with a positive floor: ``alpha*lambda_min(sigma) <= s_i <= 1``.

    Maximizes ``sum(s)`` subject to ``diag(s) <= 2*beta*sigma``.  The floor
    guarantees every feature remains distinguishable from its knockoff
    (no zero gaps) whenever ``sigma`` is positive definite.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must be in [0, 1), got {alpha}")
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must be in (0, 1], got {beta}")
    sigma = np.asarray(sigma, dtype=float)
    check_symmetric(sigma, tol=1e-10)
    lam = min_eig(sigma)
    if lam <= 0:
        raise NotPositiveDefiniteError(f"Gram matrix is not PD (lambda_min = {lam:.3e})")
    lo = alpha * lam
    if lo > 1.0 + 1e-12:
        raise InfeasibleConstraintError(
            f"floor alpha*lambda_min = {lo:.3e} exceeds the upper bound 1"
        )
    if (2.0 * beta - alpha) * lam <= 1e-12:
        raise InfeasibleConstraintError(
            "box floor is not strictly inside the semidefinite constraint "
            f"(alpha={alpha}, beta={beta}, lambda_min={lam:.3e})"
        )
    equi = np.clip(np.full(sigma.shape[0], min(1.0, 2.0 * beta * lam)), lo, 1.0)
    s, fell_back = _solve_with_backoff(2.0 * beta * sigma, lo, 1.0, equi)
    return SVector(s, SMethod.EQUIVARIANT if fell_back else SMethod.MODIFIED_SDP)


def _psd_slack(target: np.ndarray, s: np.ndarray) -> float:
    return min_eig(target - np.diag(s))


def _solve_with_backoff(
    target: np.ndarray, lo: float, hi: float, equi: np.ndarray
) -> tuple[np.ndarray, bool]:
    """Barrier solve with geometric shrinkage toward ``equi`` on failure."""
    try:
        s = _barrier_max_sum(target, lo, hi)
    except (SdpFailureError, NotPositiveDefiniteError):
        s = None
    if s is not None and np.all(np.isfinite(s)) and _psd_slack(target, s) >= -1e-8:
        return s, False
    if s is None or not np.all(np.isfinite(s)):
        return equi.copy(), True
    # shrink geometrically toward the equivariant point until feasible
    for k in range(1, 50):
        cand = equi + 0.7**k * (s - equi)
        if _psd_slack(target, cand) >= -1e-9:
            return cand, False
    return equi.copy(), True


def _barrier_max_sum(target: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """maximize sum(s)  s.t.  diag(s) <= target (PSD order),  lo <= s_i <= hi.

    Log-barrier path following with damped Newton steps.  Coordinates that
    land within 1e-6 of a box bound are snapped onto it afterwards (the
    snap is kept only if the semidefinite constraint still holds), so
    box-active solutions such as ``s_i = 1`` are returned exactly.
    """
    p = target.shape[0]
    lam_t = min_eig(target)
    if hi - lo <= 1e-12:
        s = np.full(p, hi)
        if _psd_slack(target, s) >= -1e-9:
            return s
        raise InfeasibleConstraintError("degenerate box is infeasible")
    margin = lam_t - lo
    if margin <= 1e-12:
        raise InfeasibleConstraintError("no strictly feasible starting point")

    s = np.full(p, lo + min(0.45 * margin, 0.45 * (hi - lo)))
    t = 1.0
    t_final = 3.0 * p / (1e-9 * p)  # duality-gap target 1e-9 * p
    eye = np.eye(p)

    while True:
        for _ in range(100):
            m = target - np.diag(s)
            try:
                cm = scipy.linalg.cho_factor(m, lower=True)
            except scipy.linalg.LinAlgError as exc:  # pragma: no cover - guarded by line search
                raise SdpFailureError(f"barrier iterate left the PSD cone: {exc}") from exc
            minv = scipy.linalg.cho_solve(cm, eye)
            d_lo = s - lo
            d_hi = hi - s
            g = -t + np.diag(minv) - 1.0 / d_lo + 1.0 / d_hi
            h = minv * minv + np.diag(1.0 / d_lo**2 + 1.0 / d_hi**2)
            try:
                step = -scipy.linalg.cho_solve(scipy.linalg.cho_factor(h, lower=True), g)
            except scipy.linalg.LinAlgError:
                step = -np.linalg.solve(h, g)
            decrement = float(-g @ step)
            if decrement / 2.0 <= 1e-9:
                break
            phi0 = (
                -t * s.sum()
                - 2.0 * np.log(np.diag(cm[0])).sum()
                - np.log(d_lo).sum()
                - np.log(d_hi).sum()
            )
            g_dot = float(g @ step)
            alpha = 1.0
            moved = False
            for _ in range(60):
                cand = s + alpha * step
                if (cand > lo).all() and (cand < hi).all():
                    mc = target - np.diag(cand)
                    try:
                        cc = scipy.linalg.cho_factor(mc, lower=True)
                    except scipy.linalg.LinAlgError:
                        cc = None
                    if cc is not None:
                        phic = (
                            -t * cand.sum()
                            - 2.0 * np.log(np.diag(cc[0])).sum()
                            - np.log(cand - lo).sum()
                            - np.log(hi - cand).sum()
                        )
                        if phic <= phi0 + 0.25 * alpha * g_dot:
                            s = cand
                            moved = True
                            break
                alpha *= 0.5
            if not moved:
                break
        if t >= t_final:
            break
        t = min(t * 20.0, t_final)

    # snap onto box bounds: downward snaps only relax the PSD constraint,
    # upward snaps are verified and reverted wholesale if infeasible
    snap = 1e-6
    s = s.copy()
    s[s < lo + snap] = lo
    upper = s > hi - snap
    if upper.any():
        cand = s.copy()
        cand[upper] = hi
        if _psd_slack(target, cand) >= -1e-9:
            s = cand
    return s


# --------------------------------------------------------------------------
# knockoff matrix construction
# --------------------------------------------------------------------------


def _psd_factor(a: np.ndarray, label: str) -> np.ndarray:
    """Upper-triangular Cholesky factor of a PSD matrix, or an
    eigendecomposition-based square root when ``a`` is singular."""
    vals, vecs = scipy.linalg.eigh(a)
    if vals[0] < -TOL.psd_feasibility:
        raise InfeasibleSError(f"{label} is not PSD (lambda_min = {vals[0]:.3e})")
    if vals[0] > 1e-12:
        try:
            return scipy.linalg.cholesky(a)  # upper triangular
        except scipy.linalg.LinAlgError:
            pass
    return np.sqrt(np.clip(vals, 0.0, None))[:, None] * vecs.T


def _as_svector(s) -> SVector:
    if isinstance(s, SVector):
        return s
    return SVector(np.asarray(s, dtype=float), None)


def build_knockoff(X: np.ndarray, s) -> KnockoffModel:
    """Closed-form knockoff matrix for an n-by-p design with n >= 2p.

    Computes ``Xt = X (I - Sigma^{-1} diag(s)) + U1 C1`` where ``U1`` holds
    the first p columns of the orthonormal complement of ``X`` and
    ``C1.T C1 = 2 diag(s) - diag(s) Sigma^{-1} diag(s)``.  The remaining
    n-2p complement columns are retained on the model for noise estimation.
    """
    X = np.asarray(X, dtype=float)
    svec = _as_svector(s)
    n, p = X.shape
    if svec.s.shape[0] != p:
        raise ValueError(f"s has length {svec.s.shape[0]}, expected {p}")
    if n < 2 * p:
        raise InsufficientRowsError(f"need n >= 2p, got n={n}, p={p}")
    sigma = gram(X)
    s_arr = svec.s
    sig_inv_s = solve_spd(sigma, np.diag(s_arr))
    a = 2.0 * np.diag(s_arr) - np.diag(s_arr) @ sig_inv_s
    a = (a + a.T) / 2.0
    c1 = _psd_factor(a, "2 diag(s) - diag(s) Sigma^{-1} diag(s)")
    u_full = null_complement(X, n - p)
    xt = X - X @ sig_inv_s + u_full[:, :p] @ c1
    return KnockoffModel(X=X, Xtilde=xt, s=svec, U=u_full[:, p:])


def build_localized_knockoff(
    U_P: np.ndarray, U_Q: np.ndarray, s_P: np.ndarray
) -> LocalizedKnockoffModel:
    """Knockoffs for the ``U_P`` columns only, leaving ``U_Q`` untouched.

    Applies the closed-form construction to ``U = [U_P U_Q]`` with the gap
    vector ``(s_P, 0)``; feasibility reduces to
    ``diag(s_P) <= 2 Ubar_P.T Ubar_P`` where ``Ubar_P`` is the residual of
    ``U_P`` after projecting out ``U_Q``.  Requires n >= (total columns) + k.
    """
    U_P = np.asarray(U_P, dtype=float)
    U_Q = np.asarray(U_Q, dtype=float)
    s_P = np.asarray(s_P, dtype=float)
    n, k = U_P.shape
    q = U_Q.shape[1]
    if s_P.shape[0] != k:
        raise ValueError(f"s_P has length {s_P.shape[0]}, expected {k}")
    if n < k + q + k:
        raise InsufficientRowsError(f"need n >= p + k = {k + q + k}, got n={n}")
    u = np.hstack([U_P, U_Q])
    w = null_complement(u, k)
    g = gram(u)
    s_full = np.concatenate([s_P, np.zeros(q)])
    g_inv_s = solve_spd(g, np.diag(s_full))
    a = 2.0 * np.diag(s_full) - np.diag(s_full) @ g_inv_s
    a_pp = (a[:k, :k] + a[:k, :k].T) / 2.0
    c1 = _psd_factor(a_pp, "localized 2 diag(s_P) - diag(s_P) (G^{-1})_PP diag(s_P)")
    ut = u - u @ g_inv_s
    ut[:, :k] += w @ c1
    return LocalizedKnockoffModel(U_P=U_P, U_Q=U_Q, Utilde_P=ut[:, :k], s_P=s_P)


def validate_knockoff(model: KnockoffModel) -> KnockoffReport:
    """Materialize the three model invariant norms and a pass/fail at 1e-8.

    Entries of ``s`` below 1e-10 are flagged (the matching feature can
    never be selected) but do not fail validation.
    """
    sigma = model.sigma
    s_arr = model.s.s
    gram_mismatch = float(np.abs(gram(model.Xtilde) - sigma).max())
    cross = model.X.T @ model.Xtilde
    cross_mismatch = float(np.abs(cross - (sigma - np.diag(s_arr))).max())
    if model.U.shape[1]:
        complement_mismatch = float(
            np.abs(model.U.T @ np.hstack([model.X, model.Xtilde])).max()
        )
    else:
        complement_mismatch = 0.0
    tol = TOL.knockoff_invariant
    passed = max(gram_mismatch, cross_mismatch, complement_mismatch) < tol
    zero_s = tuple(int(i) for i in np.flatnonzero(s_arr < TOL.zero_s))
    return KnockoffReport(gram_mismatch, cross_mismatch, complement_mismatch, passed, zero_s)


def localized_mismatch(model: LocalizedKnockoffModel) -> tuple[float, float]:
    """Invariant norms of a localized model: Gram mismatch and exchange mismatch."""
    u = np.hstack([model.U_P, model.U_Q])
    ut = np.hstack([model.Utilde_P, model.U_Q])
    g = gram(u)
    s_full = np.concatenate([model.s_P, np.zeros(model.U_Q.shape[1])])
    gram_mismatch = float(np.abs(gram(ut) - g).max())
    exch_mismatch = float(np.abs(g - ut.T @ u - np.diag(s_full)).max())
    return gram_mismatch, exch_mismatch


def swap_pairs(model: KnockoffModel, indices) -> KnockoffModel:
    """Return a model with ``X_j`` and ``Xt_j`` exchanged for each given j.

    The complement ``U`` is unchanged (the span of ``[X Xt]`` is invariant
    under swaps), which is what makes swap-invariance of the noise
    estimator exact.
    """
    idx = np.atleast_1d(np.asarray(indices, dtype=int))
    x = model.X.copy()
    xt = model.Xtilde.copy()
    x[:, idx], xt[:, idx] = xt[:, idx].copy(), x[:, idx].copy()
    return KnockoffModel(X=x, Xtilde=xt, s=model.s, U=model.U)
