"""Group-FDR-controlled selection.

Three filters over a user-supplied partition of the features:

* :func:`pca_prototype_filter` - per-group SVD, knockoffs built only for
  the leading left singular vectors (localized construction), selection on
  the prototype statistics.  Requires only ``n >= p + k``.
* :func:`group_knockoff_filter` - group-block-diagonal gap matrix
  ``S_i = gamma * Sigma_{ii}`` with full-design knockoffs and a weighted
  group-lasso path statistic.
* :func:`split_prototype_filter` - row-splitting prototype filter: pick one
  prototype per group by marginal correlation on the first split, run the
  plain filter on the second split's prototype columns.

Each filter is split into a response-independent preparation step and a
cheap per-response scoring step so simulation loops can reuse one knockoff
construction across many noise draws.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _kernels
from .construct import (
    KnockoffModel,
    LocalizedKnockoffModel,
    SVector,
    build_localized_knockoff,
    s_modified_sdp,
)
from .exceptions import (
    InsufficientRowsError,
    PathFailureError,
    RankDeficientGroupError,
)
from .linalg import gram, min_eig, null_complement, solve_spd, thin_svd
from .rngs import stream
from .selection import EvalReport, Offset, knockoff_threshold
from .stats import Combiner, PathConfig, StatKind, combine_magnitudes, compute_stat

__all__ = [
    "GroupStructure",
    "choose_prototypes",
    "localized_ok",
    "GroupSvd",
    "GroupSelectionResult",
    "PrototypeModel",
    "GroupKnockoffState",
    "pca_reformulate",
    "pca_prototype_model",
    "pca_prototype_score",
    "pca_prototype_filter",
    "group_knockoff_prepare",
    "group_knockoff_score",
    "group_knockoff_filter",
    "split_prototype_score",
    "split_prototype_filter",
    "group_evaluate",
]


@dataclass(frozen=True, eq=False)
class GroupStructure:
    """A partition of {0..p-1} into nonempty, disjoint, covering groups."""

    groups: tuple

    def __post_init__(self):
        seen: set[int] = set()
        cleaned = []
        for g in self.groups:
            idx = np.asarray(g, dtype=int)
            if idx.size == 0:
                raise ValueError("empty group")
            s = set(int(i) for i in idx)
            if len(s) != idx.size or s & seen:
                raise ValueError("groups must be disjoint with no repeats")
            seen |= s
            cleaned.append(idx)
        if seen != set(range(len(seen))):
            raise ValueError("groups must cover 0..p-1 exactly")
        object.__setattr__(self, "groups", tuple(cleaned))

    @property
    def k(self) -> int:
        return len(self.groups)

    @property
    def p(self) -> int:
        return sum(g.size for g in self.groups)

    def labels(self) -> np.ndarray:
        """Feature index -> group index map."""
        lab = np.empty(self.p, dtype=int)
        for i, idx in enumerate(self.groups):
            lab[idx] = i
        return lab

    @classmethod
    def from_sizes(cls, sizes) -> "GroupStructure":
        """Contiguous groups with the given sizes."""
        bounds = np.concatenate([[0], np.cumsum(sizes)])
        return cls(tuple(np.arange(a, b) for a, b in zip(bounds[:-1], bounds[1:])))

    @classmethod
    def from_json(cls, text: str) -> "GroupStructure":
        """Parse a JSON array of 1-based index arrays."""
        raw = json.loads(text)
        return cls(tuple(np.asarray(g, dtype=int) - 1 for g in raw))

    def to_json(self) -> str:
        return json.dumps([(g + 1).tolist() for g in self.groups])


@dataclass(frozen=True, eq=False)
class GroupSvd:
    """Per-group thin SVD factors ``X_g = U diag(d) V.T``."""

    factors: tuple


@dataclass(frozen=True, eq=False)
class GroupSelectionResult:
    threshold: float
    selected_groups: np.ndarray
    w_group: np.ndarray
    offset: Offset
    q: float


@dataclass(frozen=True, eq=False)
class PrototypeModel:
    """Prototype columns, their localized knockoffs, and bookkeeping.

    ``slices[i]`` is the (start, stop) range of group i's prototypes inside
    the prototype matrix.
    """

    localized: LocalizedKnockoffModel
    model: KnockoffModel
    slices: tuple


@dataclass(frozen=True, eq=False)
class GroupKnockoffState:
    """Response-independent pieces of the group knockoff filter."""

    augmented: np.ndarray
    gram2: np.ndarray
    starts: np.ndarray
    ends: np.ndarray
    weights: np.ndarray
    block_eigvals: np.ndarray
    block_eigvecs: np.ndarray
    block_vec_off: np.ndarray
    k: int
    gamma: float
    Xtilde: np.ndarray
    cfg: PathConfig


def choose_prototypes(X: np.ndarray, y: np.ndarray, groups: GroupStructure) -> np.ndarray:
    """Index of each group's maximal-marginal-correlation column for the given data."""
    norms = np.linalg.norm(X, axis=0)
    norms[norms == 0.0] = 1.0
    scores = np.abs(X.T @ y) / norms
    return np.array([idx[int(np.argmax(scores[idx]))] for idx in groups.groups])


def localized_ok(model, tol: float = 1e-8) -> bool:
    """Both localized-model invariant norms within tolerance."""
    from .construct import localized_mismatch

    g_mis, x_mis = localized_mismatch(model)
    return g_mis < tol and x_mis < tol


def pca_reformulate(X: np.ndarray, groups: GroupStructure) -> GroupSvd:
    """Thin SVD of each feature group; raises if any group is rank deficient."""
    X = np.asarray(X, dtype=float)
    factors = []
    for i, idx in enumerate(groups.groups):
        u, d, v = thin_svd(X[:, idx])
        if d[-1] <= max(X.shape) * np.finfo(float).eps * max(d[0], 1.0):
            raise RankDeficientGroupError(i)
        factors.append((u, d, v))
    return GroupSvd(tuple(factors))


def _localized_from_parts(U_P, U_Q, with_complement: bool):
    """Modified-SDP gaps on the projected prototype Gram, then the localized build."""
    if U_Q.shape[1]:
        ubar = U_P - U_Q @ solve_spd(gram(U_Q), U_Q.T @ U_P)
    else:
        ubar = U_P
    s_p = s_modified_sdp(gram(ubar), 0.5, 1.0)
    loc = build_localized_knockoff(U_P, U_Q, s_p.s)
    n, kp = U_P.shape
    if with_complement and n > 2 * kp:
        comp = null_complement(np.hstack([U_P, loc.Utilde_P]), n - 2 * kp)
    else:
        comp = np.zeros((n, 0))
    model = KnockoffModel(X=U_P, Xtilde=loc.Utilde_P, s=SVector(s_p.s, s_p.method), U=comp)
    return loc, model


def pca_prototype_model(
    X: np.ndarray,
    groups: GroupStructure,
    prototypes_per_group: int = 1,
    with_complement: bool = False,
) -> PrototypeModel:
    """Build the localized knockoff model for the leading principal components.

    Takes ``min(prototypes_per_group, group size)`` left singular vectors
    per group as prototypes; all remaining singular vectors form the
    untouched remainder block.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    svd = pca_reformulate(X, groups)
    up_cols, uq_cols, slices = [], [], []
    pos = 0
    for u, _, _ in svd.factors:
        li = min(prototypes_per_group, u.shape[1])
        up_cols.append(u[:, :li])
        uq_cols.append(u[:, li:])
        slices.append((pos, pos + li))
        pos += li
    u_p = np.hstack(up_cols)
    u_q = (
        np.hstack([c for c in uq_cols if c.shape[1]])
        if any(c.shape[1] for c in uq_cols)
        else np.zeros((n, 0))
    )
    if n < groups.p + u_p.shape[1]:
        raise InsufficientRowsError(
            f"need n >= p + k_P = {groups.p + u_p.shape[1]}, got n={n}"
        )
    loc, model = _localized_from_parts(u_p, u_q, with_complement)
    return PrototypeModel(localized=loc, model=model, slices=tuple(slices))


def pca_prototype_score(
    proto: PrototypeModel,
    y: np.ndarray,
    statistic: StatKind = StatKind.LASSO_PATH,
    path_cfg: PathConfig | None = None,
) -> np.ndarray:
    """Per-group statistic: sum of the group's prototype statistics."""
    sv = compute_stat(proto.model, np.asarray(y, dtype=float), statistic, path_cfg=path_cfg)
    return np.array([sv.w[a:b].sum() for a, b in proto.slices])


def pca_prototype_filter(
    X: np.ndarray,
    y: np.ndarray,
    groups: GroupStructure,
    q: float,
    offset: Offset = Offset.KNOCKOFF,
    statistic: StatKind = StatKind.LASSO_PATH,
    prototypes_per_group: int = 1,
    path_cfg: PathConfig | None = None,
) -> GroupSelectionResult:
    """Group selection on per-group principal-component prototypes."""
    statistic = StatKind(statistic)
    proto = pca_prototype_model(
        X, groups, prototypes_per_group, with_complement=statistic == StatKind.HALF_LASSO
    )
    w_group = pca_prototype_score(proto, y, statistic, path_cfg)
    sel = knockoff_threshold(w_group, q, offset)
    return GroupSelectionResult(sel.threshold, sel.selected, w_group, Offset(offset), q)


def group_knockoff_prepare(
    X: np.ndarray, groups: GroupStructure, cfg: PathConfig | None = None
) -> GroupKnockoffState:
    """Build the group knockoff matrix and the group-lasso scaffolding.

    The gap matrix is ``S = blockdiag(gamma * Sigma_{ii})`` with
    ``gamma = min(1, 2 lambda_min(D Sigma D))`` where ``D`` holds the
    inverse square roots of the within-group Gram blocks.
    """
    X = np.asarray(X, dtype=float)
    cfg = cfg or PathConfig()
    n, p = X.shape
    if n < 2 * p:
        raise InsufficientRowsError(f"need n >= 2p, got n={n}, p={p}")
    sigma = gram(X)
    d_mat = np.zeros((p, p))
    for i, idx in enumerate(groups.groups):
        block = sigma[np.ix_(idx, idx)]
        vals, vecs = scipy.linalg.eigh(block)
        if vals[0] <= 0:
            raise RankDeficientGroupError(i)
        d_mat[np.ix_(idx, idx)] = (vecs / np.sqrt(vals)) @ vecs.T
    gamma = min(1.0, 2.0 * min_eig(d_mat @ sigma @ d_mat))
    s_big = np.zeros((p, p))
    for idx in groups.groups:
        s_big[np.ix_(idx, idx)] = gamma * sigma[np.ix_(idx, idx)]

    sig_inv_s = solve_spd(sigma, s_big)
    a = 2.0 * s_big - s_big @ sig_inv_s
    a = (a + a.T) / 2.0
    from .construct import _psd_factor

    c1 = _psd_factor(a, "2S - S Sigma^-1 S")
    u_full = null_complement(X, n - p)
    xt = X - X @ sig_inv_s + u_full[:, :p] @ c1

    # contiguous block layout: original groups then knockoff groups
    cols = [X[:, idx] for idx in groups.groups] + [xt[:, idx] for idx in groups.groups]
    a2 = np.ascontiguousarray(np.hstack(cols))
    sizes = [idx.size for idx in groups.groups] * 2
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    g2 = np.ascontiguousarray(gram(a2))
    starts = bounds[:-1].astype(np.int64)
    ends = bounds[1:].astype(np.int64)
    # per-block Gram eigendecompositions for the exact block solves
    wmax = int(max(sizes))
    eigvals = np.zeros((len(sizes), wmax))
    vec_off = np.zeros(len(sizes), dtype=np.int64)
    packed = []
    pos = 0
    for i, (a, b) in enumerate(zip(starts, ends)):
        vals, vecs = scipy.linalg.eigh(g2[a:b, a:b])
        w = b - a
        eigvals[i, :w] = vals
        vec_off[i] = pos
        packed.append(np.ascontiguousarray(vecs).ravel())
        pos += w * w
    return GroupKnockoffState(
        augmented=a2,
        gram2=g2,
        starts=starts,
        ends=ends,
        weights=np.sqrt(np.array(sizes, dtype=float)),
        block_eigvals=eigvals,
        block_eigvecs=np.concatenate(packed),
        block_vec_off=vec_off,
        k=groups.k,
        gamma=gamma,
        Xtilde=xt,
        cfg=cfg,
    )


def group_knockoff_score(state: GroupKnockoffState, y: np.ndarray) -> np.ndarray:
    """Signed-max of the weighted group-lasso entry values, one per group."""
    y = np.asarray(y, dtype=float)
    # solve at unit response scale (positive homogeneity), rescale entries
    y_scale = float(np.linalg.norm(y))
    if y_scale <= 0.0:
        return np.zeros(state.k)
    c0 = state.augmented.T @ (y / y_scale)
    block_norms = np.array(
        [np.linalg.norm(c0[a:b]) for a, b in zip(state.starts, state.ends)]
    )
    lam_max = float((block_norms / state.weights).max())
    if lam_max <= 0.0:
        return np.zeros(state.k)
    entry, fail = _kernels.group_lasso_entry_grid(
        state.gram2,
        np.ascontiguousarray(c0),
        state.starts,
        state.ends,
        state.weights,
        state.block_eigvals,
        state.block_eigvecs,
        state.block_vec_off,
        np.ascontiguousarray(state.cfg.grid(lam_max)),
        1e-7,
        10_000,
    )
    if fail >= 0:
        raise PathFailureError(int(fail))
    entry = entry * y_scale
    return combine_magnitudes(entry[: state.k], entry[state.k :], Combiner.SIGNED_MAX)


def group_knockoff_filter(
    X: np.ndarray,
    y: np.ndarray,
    groups: GroupStructure,
    q: float,
    offset: Offset = Offset.KNOCKOFF,
    cfg: PathConfig | None = None,
) -> GroupSelectionResult:
    """Group-block knockoffs with a weighted group-lasso path statistic."""
    state = group_knockoff_prepare(X, groups, cfg)
    w_group = group_knockoff_score(state, y)
    sel = knockoff_threshold(w_group, q, offset)
    return GroupSelectionResult(sel.threshold, sel.selected, w_group, Offset(offset), q)


def split_prototype_score(
    X: np.ndarray,
    y: np.ndarray,
    groups: GroupStructure,
    split_seed: int = 0,
    split_frac: float = 1.0 / 3.0,
    statistic: StatKind = StatKind.LASSO_PATH,
    path_cfg: PathConfig | None = None,
) -> np.ndarray:
    """Per-group statistic of the data-splitting prototype filter.

    The prototype set depends on the response (it is chosen on the first
    split), so unlike the other two filters there is no response-free
    preparation step.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    statistic = StatKind(statistic)
    n, p = X.shape
    k = groups.k
    n1 = int(round(n * split_frac))
    n2 = n - n1
    if n1 < 1 or n2 < p + k:
        raise InsufficientRowsError(
            f"split leaves n2={n2} rows but the localized construction needs {p + k}"
        )
    perm = stream(split_seed, 0x5F17).permutation(n)
    part1, part2 = perm[:n1], perm[n1:]

    proto = choose_prototypes(X[part1], y[part1], groups)

    x2 = X[part2]
    x2 = x2 / np.linalg.norm(x2, axis=0)
    others = np.setdiff1d(np.arange(p), proto)
    _, model = _localized_from_parts(
        x2[:, proto], x2[:, others], with_complement=statistic == StatKind.HALF_LASSO
    )
    sv = compute_stat(model, y[part2], statistic, path_cfg=path_cfg)
    return sv.w


def split_prototype_filter(
    X: np.ndarray,
    y: np.ndarray,
    groups: GroupStructure,
    q: float,
    offset: Offset = Offset.KNOCKOFF,
    split_seed: int = 0,
    split_frac: float = 1.0 / 3.0,
    statistic: StatKind = StatKind.LASSO_PATH,
    path_cfg: PathConfig | None = None,
) -> GroupSelectionResult:
    """Data-splitting prototype filter: a group is selected iff its prototype is."""
    w = split_prototype_score(X, y, groups, split_seed, split_frac, statistic, path_cfg)
    sel = knockoff_threshold(w, q, offset)
    return GroupSelectionResult(sel.threshold, sel.selected, w, Offset(offset), q)


def group_evaluate(result: GroupSelectionResult, truth_groups) -> EvalReport:
    """FDP and power at group granularity."""
    truth = set(int(i) for i in truth_groups)
    selected = set(int(i) for i in result.selected_groups)
    n_sel = len(selected)
    n_true = len(selected & truth)
    return EvalReport(
        fdp=(n_sel - n_true) / max(n_sel, 1),
        power=n_true / max(len(truth), 1),
        n_selected=n_sel,
        n_true_selected=n_true,
    )
