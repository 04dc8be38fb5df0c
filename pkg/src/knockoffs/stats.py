"""Knockoff statistics: per-feature scores W comparing each column to its knockoff.

Every statistic here depends on the data only through the augmented Gram
matrix, the feature-response correlations, and (for the noise-scaled
variants) the projection of the response onto the orthogonal complement,
so swapping a column with its knockoff flips the sign of that coordinate
of W and leaves the others unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .construct import KnockoffModel
from .exceptions import (
    InvalidWeightError,
    NoComplementError,
    NotPositiveDefiniteError,
    PathFailureError,
    SingularGramError,
)
from .linalg import TOL, gram, solve_spd

__all__ = [
    "StatKind",
    "Combiner",
    "StatVector",
    "PathConfig",
    "NoiseEstimate",
    "HalfPenalizedSolution",
    "soft_threshold",
    "combine_magnitudes",
    "stat_marginal_corr",
    "stat_least_squares",
    "half_lasso",
    "weighted_half_lasso",
    "neg_half_lasso",
    "half_lasso_sigma_scaled",
    "stat_lasso_path",
    "stat_forward_selection",
    "stat_omp",
    "estimate_sigma",
    "compute_stat",
]


class StatKind(str, Enum):
    MARGINAL_CORR = "marginal-corr"
    LEAST_SQUARES = "least-squares"
    HALF_LASSO = "half-lasso"
    WEIGHTED_HALF_LASSO = "weighted-half-lasso"
    NEG_HALF_LASSO = "neg-half-lasso"
    LASSO_PATH = "lasso-path"
    FORWARD_SELECTION = "forward-selection"
    OMP = "omp"


class Combiner(str, Enum):
    DIFFERENCE = "difference"
    SIGNED_MAX = "signed-max"


#: Default combiner per statistic: difference for least squares and marginal
#: correlation, signed max for the path and half-penalized statistics.
DEFAULT_COMBINER = {
    StatKind.MARGINAL_CORR: Combiner.DIFFERENCE,
    StatKind.LEAST_SQUARES: Combiner.DIFFERENCE,
    StatKind.HALF_LASSO: Combiner.SIGNED_MAX,
    StatKind.WEIGHTED_HALF_LASSO: Combiner.SIGNED_MAX,
    StatKind.NEG_HALF_LASSO: Combiner.SIGNED_MAX,
    StatKind.LASSO_PATH: Combiner.SIGNED_MAX,
    StatKind.FORWARD_SELECTION: Combiner.SIGNED_MAX,
    StatKind.OMP: Combiner.SIGNED_MAX,
}


@dataclass(frozen=True, eq=False)
class StatVector:
    """Length-p statistic vector with provenance metadata."""

    w: np.ndarray
    kind: StatKind
    combiner: Combiner


@dataclass(frozen=True)
class PathConfig:
    """Geometric penalty grid for the path statistics."""

    num_lambda: int = 1000
    lambda_min_ratio: float = 1e-3

    def __post_init__(self):
        if self.num_lambda < 2:
            raise ValueError("num_lambda must be at least 2")
        if not 0.0 < self.lambda_min_ratio < 1.0:
            raise ValueError("lambda_min_ratio must be in (0, 1)")

    def grid(self, lam_max: float) -> np.ndarray:
        return np.geomspace(lam_max, lam_max * self.lambda_min_ratio, self.num_lambda)


@dataclass(frozen=True)
class NoiseEstimate:
    sigma_hat: float
    dof: int


@dataclass(frozen=True, eq=False)
class HalfPenalizedSolution:
    """Closed-form minimizer of a half-penalized objective.

    ``weights`` is the diagonal reweighting (all ones when unweighted); the
    statistic divides the coefficient magnitudes by it.
    """

    beta_hat: np.ndarray
    beta_tilde: np.ndarray
    lam: float
    weights: np.ndarray

    def stat(self, kind: StatKind, combiner: Combiner = Combiner.SIGNED_MAX) -> StatVector:
        a = np.abs(self.beta_hat) / self.weights
        b = np.abs(self.beta_tilde) / self.weights
        return StatVector(combine_magnitudes(a, b, combiner), kind, combiner)


def soft_threshold(x: np.ndarray, t: np.ndarray | float) -> np.ndarray:
    """``sign(x) * max(|x| - t, 0)`` elementwise."""
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def combine_magnitudes(a: np.ndarray, b: np.ndarray, combiner: Combiner) -> np.ndarray:
    """Combine nonnegative original/knockoff magnitudes into a signed W."""
    if combiner == Combiner.DIFFERENCE:
        return a - b
    return np.maximum(a, b) * np.sign(a - b)


# --------------------------------------------------------------------------
# closed-form statistics
# --------------------------------------------------------------------------


def _ls_split(model: KnockoffModel, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Decoupled least squares on [X Xt]: returns (bhat+btilde, bhat-btilde).

    The sum solves against ``Sigma - diag(s)/2`` and the difference against
    ``diag(s)/2``; the two blocks are exactly decoupled because the column
    spaces of X+Xt and X-Xt are orthogonal.
    """
    s = model.s.s
    if np.any(s < TOL.zero_s):
        raise SingularGramError("diag(s)/2", "zero entries in s make the Gram singular")
    half_sum = (model.X + model.Xtilde) / 2.0
    half_diff = (model.X - model.Xtilde) / 2.0
    try:
        a_sum = solve_spd(model.sigma - np.diag(s) / 2.0, half_sum.T @ y)
    except NotPositiveDefiniteError as exc:
        raise SingularGramError("Sigma - diag(s)/2", str(exc)) from exc
    a_diff = (half_diff.T @ y) * (2.0 / s)
    return a_sum, a_diff


def stat_marginal_corr(model: KnockoffModel, y: np.ndarray) -> StatVector:
    """``W_j = |X_j.T y| - |Xt_j.T y|``."""
    w = np.abs(model.X.T @ y) - np.abs(model.Xtilde.T @ y)
    return StatVector(w, StatKind.MARGINAL_CORR, Combiner.DIFFERENCE)


def stat_least_squares(
    model: KnockoffModel, y: np.ndarray, combiner: Combiner = Combiner.DIFFERENCE
) -> StatVector:
    """W from the least squares coefficients of y on [X Xt]."""
    a_sum, a_diff = _ls_split(model, y)
    beta_hat = (a_sum + a_diff) / 2.0
    beta_tilde = (a_sum - a_diff) / 2.0
    w = combine_magnitudes(np.abs(beta_hat), np.abs(beta_tilde), combiner)
    return StatVector(w, StatKind.LEAST_SQUARES, combiner)


def half_lasso(model: KnockoffModel, y: np.ndarray, lam: float) -> HalfPenalizedSolution:
    """Minimizer of ``0.5 ||y - X bhat - Xt btilde||^2 + lam ||bhat - btilde||_1``.

    Only the difference of the two coefficient blocks is penalized, which
    decouples the problem into p scalar soft-threshold updates on top of
    the least squares solution.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    a_sum, a_diff = _ls_split(model, y)
    shrunk = soft_threshold(a_diff, 2.0 * lam / model.s.s)
    return HalfPenalizedSolution(
        beta_hat=(a_sum + shrunk) / 2.0,
        beta_tilde=(a_sum - shrunk) / 2.0,
        lam=lam,
        weights=np.ones_like(a_sum),
    )


def weighted_half_lasso(
    model: KnockoffModel, y: np.ndarray, lam: float, z: np.ndarray | None = None
) -> HalfPenalizedSolution:
    """Half Lasso with per-feature reweighting ``z`` (default ``sqrt(s/2)``).

    The default balances the per-coordinate noise level of the decoupled
    difference block against the soft threshold.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    s = model.s.s
    if z is None:
        z = np.sqrt(s / 2.0)
    else:
        z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise InvalidWeightError("weights must be strictly positive")
    a_sum, a_diff = _ls_split(model, y)
    shrunk = soft_threshold(a_diff, 2.0 * lam * z / s)
    return HalfPenalizedSolution(
        beta_hat=z * (a_sum + shrunk) / 2.0,
        beta_tilde=z * (a_sum - shrunk) / 2.0,
        lam=lam,
        weights=z,
    )


def neg_half_lasso(
    model: KnockoffModel, y: np.ndarray, lam: float, mu: np.ndarray | None = None
) -> HalfPenalizedSolution:
    """Half-penalized solution with a negative l1 penalty (default ``mu = s``).

    The negative penalty pushes the difference block away from zero by
    ``2*lam*mu/s`` in its current sign direction, enlarging the gap between
    each coefficient and its knockoff copy.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    s = model.s.s
    if mu is None:
        mu = s.copy()
    else:
        mu = np.asarray(mu, dtype=float)
    if np.any(mu < 0):
        raise InvalidWeightError("mu must be nonnegative")
    a_sum, a_diff = _ls_split(model, y)
    expanded = a_diff + (2.0 * lam * mu / s) * np.sign(a_diff)
    return HalfPenalizedSolution(
        beta_hat=(a_sum + expanded) / 2.0,
        beta_tilde=(a_sum - expanded) / 2.0,
        lam=lam,
        weights=np.ones_like(a_sum),
    )


def estimate_sigma(model: KnockoffModel, y: np.ndarray) -> NoiseEstimate:
    """``sigma_hat = ||U.T y||_2 / sqrt(n - 2p)`` from the stored complement.

    Invariant under any column/knockoff swap because U only depends on the
    span of [X Xt].
    """
    dof = model.U.shape[1]
    if dof == 0:
        raise NoComplementError("model has no orthogonal complement (n = 2p)")
    return NoiseEstimate(float(np.linalg.norm(model.U.T @ y) / np.sqrt(dof)), dof)


def half_lasso_sigma_scaled(
    model: KnockoffModel, y: np.ndarray, lam: float = 1.0
) -> HalfPenalizedSolution:
    """Half Lasso with effective penalty ``lam * sigma_hat``."""
    est = estimate_sigma(model, y)
    return half_lasso(model, y, lam * est.sigma_hat)


# --------------------------------------------------------------------------
# path statistics
# --------------------------------------------------------------------------


def _augmented(model: KnockoffModel) -> np.ndarray:
    return np.hstack([model.X, model.Xtilde])


def _path_w(entry: np.ndarray, p: int, kind: StatKind, combiner: Combiner) -> StatVector:
    w = combine_magnitudes(entry[:p], entry[p:], combiner)
    return StatVector(w, kind, combiner)


def stat_lasso_path(
    model: KnockoffModel,
    y: np.ndarray,
    cfg: PathConfig | None = None,
    combiner: Combiner = Combiner.SIGNED_MAX,
) -> StatVector:
    """Entry values on a geometric Lasso grid over the augmented design.

    ``Z_j`` is the largest grid penalty at which coefficient j is nonzero
    (0 if it never enters); solved by cyclic coordinate descent with warm
    starts down the grid.
    """
    cfg = cfg or PathConfig()
    a = _augmented(model)
    # the path is positively homogeneous in y, so solve at unit scale (the
    # convergence tolerance is meaningful there) and rescale the entries
    y_scale = float(np.linalg.norm(y))
    if y_scale <= 0.0:
        return _path_w(np.zeros(2 * model.p), model.p, StatKind.LASSO_PATH, combiner)
    c0 = a.T @ (y / y_scale)
    lam_max = float(np.abs(c0).max())
    if lam_max <= 0.0:
        return _path_w(np.zeros(2 * model.p), model.p, StatKind.LASSO_PATH, combiner)
    g = gram(a)
    entry, fail = _kernels.lasso_entry_grid(
        np.ascontiguousarray(g),
        np.ascontiguousarray(c0),
        np.ascontiguousarray(np.diag(g)),
        np.ascontiguousarray(cfg.grid(lam_max)),
        1e-7,
        10_000,
    )
    if fail >= 0:
        raise PathFailureError(int(fail))
    return _path_w(entry * y_scale, model.p, StatKind.LASSO_PATH, combiner)


def stat_forward_selection(
    model: KnockoffModel, y: np.ndarray, combiner: Combiner = Combiner.SIGNED_MAX
) -> StatVector:
    """Greedy forward selection with single-column residual deflation.

    At each step the unentered column with the largest absolute residual
    correlation enters (ties to the lowest index) and the residual is
    deflated along that column without refitting.  Entry step k maps to
    ``Z = 2p - k + 1``; columns whose residual correlation is exactly
    exhausted never enter and keep ``Z = 0``.
    """
    a = _augmented(model)
    d = a.shape[1]
    r = y.astype(float).copy()
    z = np.zeros(d)
    entered = np.zeros(d, dtype=bool)
    zero_tol = 1e-12 * max(1.0, float(np.linalg.norm(y)))
    for step in range(1, d + 1):
        corr = a.T @ r
        mag = np.abs(corr)
        mag[entered] = -1.0
        j = int(np.argmax(mag))
        if mag[j] <= zero_tol:
            break
        entered[j] = True
        z[j] = d - step + 1
        r = r - corr[j] * a[:, j]
    return _path_w(z, model.p, StatKind.FORWARD_SELECTION, combiner)


def stat_omp(
    model: KnockoffModel, y: np.ndarray, combiner: Combiner = Combiner.SIGNED_MAX
) -> StatVector:
    """Orthogonal matching pursuit entry order on the augmented design.

    Like forward selection but with a full least squares refit on the
    active set after every entry; stops once the residual norm drops below
    1e-10 (remaining columns keep ``Z = 0``).
    """
    import scipy.linalg

    a = _augmented(model)
    d = a.shape[1]
    g = gram(a)
    c0 = a.T @ y
    z = np.zeros(d)
    active: list[int] = []
    coef = np.zeros(0)
    r_norm = float(np.linalg.norm(y))
    for step in range(1, d + 1):
        if r_norm < 1e-10:
            break
        corr = c0 - g[:, active] @ coef if active else c0.copy()
        mag = np.abs(corr)
        mag[active] = -1.0
        j = int(np.argmax(mag))
        active.append(j)
        z[j] = d - step + 1
        g_act = g[np.ix_(active, active)]
        try:
            cf = scipy.linalg.cho_factor(g_act, lower=True)
        except scipy.linalg.LinAlgError as exc:
            raise SingularGramError("active-set Gram", str(exc)) from exc
        coef = scipy.linalg.cho_solve(cf, c0[active])
        r_norm = float(np.linalg.norm(y - a[:, active] @ coef))
    return _path_w(z, model.p, StatKind.OMP, combiner)


# --------------------------------------------------------------------------
# dispatcher
# --------------------------------------------------------------------------


def compute_stat(
    model: KnockoffModel,
    y: np.ndarray,
    kind: StatKind,
    combiner: Combiner | None = None,
    *,
    lam: float | None = None,
    weights: np.ndarray | None = None,
    mu: np.ndarray | None = None,
    path_cfg: PathConfig | None = None,
) -> StatVector:
    """Compute any of the eight statistics with its conventional defaults.

    Defaults: the plain half Lasso is noise-scaled (penalty ``1.0 *
    sigma_hat``, requiring n > 2p); the weighted half Lasso uses
    ``lam = 0.5`` with weights ``sqrt(s/2)``; the negative half Lasso uses
    ``lam = 0.5`` with ``mu = s``.
    """
    kind = StatKind(kind)
    combiner = Combiner(combiner) if combiner is not None else DEFAULT_COMBINER[kind]
    if kind == StatKind.MARGINAL_CORR:
        return stat_marginal_corr(model, y)
    if kind == StatKind.LEAST_SQUARES:
        return stat_least_squares(model, y, combiner)
    if kind == StatKind.HALF_LASSO:
        sol = half_lasso_sigma_scaled(model, y, 1.0 if lam is None else lam)
        return sol.stat(kind, combiner)
    if kind == StatKind.WEIGHTED_HALF_LASSO:
        sol = weighted_half_lasso(model, y, 0.5 if lam is None else lam, weights)
        return sol.stat(kind, combiner)
    if kind == StatKind.NEG_HALF_LASSO:
        sol = neg_half_lasso(model, y, 0.5 if lam is None else lam, mu)
        return sol.stat(kind, combiner)
    if kind == StatKind.LASSO_PATH:
        return stat_lasso_path(model, y, path_cfg, combiner)
    if kind == StatKind.FORWARD_SELECTION:
        return stat_forward_selection(model, y, combiner)
    return stat_omp(model, y, combiner)
