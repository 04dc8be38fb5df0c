"""Seeded design/signal generators and the Monte Carlo experiment driver.

Every random quantity is drawn from a counter-based stream keyed by
``(experiment seed, role, point index, design index, ...)`` so identical
configurations reproduce bit-identical results regardless of execution
order or worker count.

Desk-scale presets shrink the full-scale experiment dimensions by roughly
5-10x while preserving the block-size ratios, sparsity level, and q; the
full-scale dimensions remain available via ``scale="paper"``.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from .construct import SVector, build_knockoff, s_equivariant, s_modified_sdp, s_sdp
from .exceptions import InvalidSpecError, ZeroSAtSignalError
from .groups import (
    GroupStructure,
    group_knockoff_prepare,
    group_knockoff_score,
    pca_prototype_model,
    pca_prototype_score,
    split_prototype_score,
)
from .linalg import gram, min_eig
from .rngs import stream
from .selection import EvalReport, Offset, evaluate, knockoff_threshold, monte_carlo_fdr
from .stats import PathConfig, StatKind, compute_stat

__all__ = [
    "DesignKind",
    "DesignSpec",
    "SignalKind",
    "SignalBlock",
    "SignalSpec",
    "ExperimentRow",
    "ExperimentReport",
    "population_covariance",
    "gen_design",
    "gen_signal",
    "run_experiment",
    "PRESETS",
]

log = logging.getLogger(__name__)

# stream roles
_R_DESIGN = 11
_R_TRUTH = 12
_R_NOISE = 13
_R_SPLIT = 14


class DesignKind(str, Enum):
    TWO_BLOCK_SIGN = "two-block-sign"
    FOUR_BLOCK_ALT = "four-block-alt"
    GROUP_EQUI = "group-equi"
    GROUP_TWO_SIZES = "group-two-sizes"
    IID_GAUSS = "iid-gauss"
    EXPLICIT_SIGN = "explicit-sign"


@dataclass(frozen=True)
class DesignSpec:
    """Design-matrix recipe.

    ``sizes`` is interpreted per kind: (|A|, |B|) for the sign designs,
    (|A1|, |A2|, |B1|, |B2|) for the four-block design, and the per-group
    sizes for the group designs.
    """

    kind: DesignKind
    n: int
    sizes: tuple
    rho: float = 0.0
    rho2: float = 0.0
    gamma: float = 0.0
    seed: int = 0

    @property
    def p(self) -> int:
        return int(sum(self.sizes))


class SignalKind(str, Enum):
    OVER_S = "over-s"
    FIXED_AMPLITUDE = "fixed"
    PLUS_MINUS = "plus-minus"


@dataclass(frozen=True, eq=False)
class SignalBlock:
    """Draw ``count`` signal indices from ``indices`` with a common scale."""

    indices: np.ndarray
    count: int
    scale: float = 1.0


@dataclass(frozen=True, eq=False)
class SignalSpec:
    kind: SignalKind
    amplitude: float
    blocks: tuple


def population_covariance(spec: DesignSpec) -> np.ndarray:
    """Population covariance implied by the recipe; raises if it is not PD."""
    p = spec.p
    kind = DesignKind(spec.kind)
    if kind == DesignKind.IID_GAUSS:
        cov = np.eye(p)
    elif kind in (DesignKind.TWO_BLOCK_SIGN, DesignKind.EXPLICIT_SIGN):
        a, b = spec.sizes
        u = np.concatenate([np.ones(a), -np.ones(b)])
        cov = (1.0 - spec.rho) * np.eye(p) + spec.rho * np.outer(u, u)
    elif kind == DesignKind.FOUR_BLOCK_ALT:
        a1, a2, b1, b2 = spec.sizes
        u = np.concatenate([np.ones(a1 + a2), -np.ones(b1 + b2)])
        cov = (1.0 - spec.rho) * np.eye(p) + spec.rho * np.outer(u, u)
        for start, size in ((a1, a2), (a1 + a2 + b1, b2)):
            blk = slice(start, start + size)
            cov[blk, blk] = spec.rho2
            cov[blk, blk] += (1.0 - spec.rho2) * np.eye(size)
    elif kind in (DesignKind.GROUP_EQUI, DesignKind.GROUP_TWO_SIZES):
        cov = np.full((p, p), spec.gamma * spec.rho)
        pos = 0
        for size in spec.sizes:
            blk = slice(pos, pos + size)
            cov[blk, blk] = spec.rho
            pos += size
        np.fill_diagonal(cov, 1.0)
    else:  # pragma: no cover
        raise InvalidSpecError(f"unknown design kind {spec.kind}")
    if min_eig(cov) <= 1e-12:
        raise InvalidSpecError(
            f"{kind.value} covariance is not positive definite for these parameters"
        )
    return cov


def gen_design(spec: DesignSpec) -> np.ndarray:
    """Unit-column n-by-p design matrix, deterministic per seed.

    Gaussian-row kinds draw rows from the population covariance and
    normalize the columns; draws whose sample Gram is numerically singular
    are rejected and redrawn (logged).  The explicit sign kind is fully
    deterministic: a sign row over the identity, padded with zero rows.
    """
    cov = population_covariance(spec)
    n, p = spec.n, spec.p
    if DesignKind(spec.kind) == DesignKind.EXPLICIT_SIGN:
        if n < p + 1:
            raise InvalidSpecError("explicit sign design needs n >= p + 1")
        a_sz, b_sz = spec.sizes
        amp = np.sqrt(1.0 - spec.rho)
        lam = np.sqrt(spec.rho / (1.0 - spec.rho))
        row = lam * amp * np.concatenate([np.ones(a_sz), -np.ones(b_sz)])
        return np.vstack([row, amp * np.eye(p), np.zeros((n - p - 1, p))])
    if n < p:
        raise InvalidSpecError(f"need n >= p, got n={n}, p={p}")
    chol = scipy.linalg.cholesky(cov, lower=True)
    for attempt in range(20):
        g = stream(spec.seed, _R_DESIGN, attempt).standard_normal((n, p))
        x = g @ chol.T
        x = x / np.linalg.norm(x, axis=0)
        if min_eig(gram(x)) >= 1e-10:
            if attempt:
                log.debug("design redrawn %d time(s) for seed %s", attempt, spec.seed)
            return x
        log.debug("rejecting near-singular design draw (seed %s)", spec.seed)
    raise InvalidSpecError("could not draw a numerically nonsingular design in 20 tries")


def gen_signal(spec: SignalSpec, s, truth_seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient vector and its support, deterministic per seeds.

    Over-s signals put ``scale * amplitude / s_i`` on each chosen index and
    raise :class:`ZeroSAtSignalError` when a chosen index has a zero gap
    (the caller is expected to redraw the design).
    """
    s_arr = s.s if isinstance(s, SVector) else np.asarray(s, dtype=float)
    p = s_arr.shape[0]
    rng = stream(truth_seed, _R_TRUTH)
    beta = np.zeros(p)
    chosen: list[tuple[np.ndarray, float]] = []
    for block in spec.blocks:
        idx = np.asarray(block.indices, dtype=int)
        if block.count > idx.size:
            raise InvalidSpecError(f"block asks for {block.count} signals from {idx.size} indices")
        pick = idx if block.count == idx.size else np.sort(rng.choice(idx, block.count, replace=False))
        chosen.append((pick, block.scale))
    kind = SignalKind(spec.kind)
    for pick, scale in chosen:
        if pick.size == 0:
            continue
        if kind == SignalKind.OVER_S:
            if np.any(s_arr[pick] < 1e-10):
                raise ZeroSAtSignalError("a signal index has a zero knockoff gap")
            beta[pick] = scale * spec.amplitude / s_arr[pick]
        elif kind == SignalKind.FIXED_AMPLITUDE:
            beta[pick] = scale * spec.amplitude
        else:  # PLUS_MINUS
            signs = rng.integers(0, 2, pick.size) * 2.0 - 1.0
            beta[pick] = scale * spec.amplitude * signs
    truth = np.sort(np.concatenate([pick for pick, _ in chosen])) if chosen else np.empty(0, int)
    truth = truth[beta[truth] != 0.0] if truth.size else truth
    return beta, truth


# --------------------------------------------------------------------------
# experiment driver
# --------------------------------------------------------------------------

def _build_s(plan, sigma):
    if plan.s_method == "equi":
        return s_equivariant(sigma)
    if plan.s_method == "sdp":
        return s_sdp(sigma)
    return s_modified_sdp(sigma, plan.s_alpha, plan.s_beta)

_CSV_COLUMNS = [
    "preset",
    "scale",
    "point",
    "method",
    "trials",
    "fdr_plus",
    "fdr_plus_se",
    "power_plus",
    "power_plus_se",
    "mfdr_plus",
    "mfdr_plus_se",
    "fdr_knockoff",
    "fdr_knockoff_se",
    "power_knockoff",
    "power_knockoff_se",
    "mfdr_knockoff",
    "mfdr_knockoff_se",
    "mean_selected_plus",
    "mean_selected_knockoff",
]


@dataclass(frozen=True)
class ExperimentRow:
    point: str
    method: str
    trials: int
    fdr_plus: float
    fdr_plus_se: float
    power_plus: float
    power_plus_se: float
    mfdr_plus: float
    mfdr_plus_se: float
    fdr_knockoff: float
    fdr_knockoff_se: float
    power_knockoff: float
    power_knockoff_se: float
    mfdr_knockoff: float
    mfdr_knockoff_se: float
    mean_selected_plus: float
    mean_selected_knockoff: float
    wall_time_s: float


@dataclass(frozen=True)
class ExperimentReport:
    """Aggregated rows plus the fully resolved configuration.

    Wall-clock timings live only on the in-memory rows; the CSV/JSON
    emitters drop them so identical invocations produce byte-identical
    files.
    """

    config: dict
    rows: tuple

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(_CSV_COLUMNS)
            for row in self.rows:
                writer.writerow(
                    [self.config["preset"], self.config["scale"]]
                    + [_fmt(getattr(row, c)) for c in _CSV_COLUMNS[2:]]
                )

    def to_json(self) -> str:
        rows = []
        for row in self.rows:
            d = {c: getattr(row, c) for c in _CSV_COLUMNS[2:]}
            rows.append(d)
        return json.dumps({"config": self.config, "rows": rows}, indent=2, sort_keys=True)

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    def row(self, point: str, method: str) -> ExperimentRow:
        for r in self.rows:
            if r.point == point and r.method == method:
                return r
        raise KeyError(f"no row for point={point!r} method={method!r}")


def _fmt(x):
    return repr(x) if isinstance(x, float) else x


def _summarize(point_label, method, reports_plus, reports_ko, q, wall) -> ExperimentRow:
    plus = monte_carlo_fdr(reports_plus, q)
    ko = monte_carlo_fdr(reports_ko, q)
    return ExperimentRow(
        point=point_label,
        method=method,
        trials=plus.n_trials,
        fdr_plus=plus.fdr,
        fdr_plus_se=plus.fdr_se,
        power_plus=plus.power,
        power_plus_se=plus.power_se,
        mfdr_plus=plus.mfdr,
        mfdr_plus_se=plus.mfdr_se,
        fdr_knockoff=ko.fdr,
        fdr_knockoff_se=ko.fdr_se,
        power_knockoff=ko.power,
        power_knockoff_se=ko.power_se,
        mfdr_knockoff=ko.mfdr,
        mfdr_knockoff_se=ko.mfdr_se,
        mean_selected_plus=plus.mean_selected,
        mean_selected_knockoff=ko.mean_selected,
        wall_time_s=wall,
    )


@dataclass
class _Plan:
    mode: str
    config: dict
    points: list
    label: object
    design_spec: object
    signal_spec: object
    n_designs: int
    n_reps: int
    q: float
    sigma: float
    statistics: list = field(default_factory=list)
    s_method: str = "msdp"
    s_alpha: float = 0.5
    s_beta: float = 0.75
    groups_struct: object = None
    group_methods: list = field(default_factory=list)
    group_statistic: StatKind = StatKind.LASSO_PATH
    path_cfg: PathConfig = field(default_factory=PathConfig)
    split_frac: float = 1.0 / 3.0
    prototypes_per_group: int = 1
    shared_designs: bool = True

    @property
    def require_positive_s(self) -> bool:
        needs = {
            StatKind.LEAST_SQUARES,
            StatKind.HALF_LASSO,
            StatKind.WEIGHTED_HALF_LASSO,
            StatKind.NEG_HALF_LASSO,
        }
        return any(k in needs for k in self.statistics)


def _map_ordered(fn, n_tasks: int, threads: int):
    """Apply ``fn`` to range(n_tasks), returning results in task order."""
    if threads <= 1 or n_tasks <= 1:
        return [fn(i) for i in range(n_tasks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_tasks)))


def _derived_seed(*key) -> int:
    return int(stream(*key).integers(2**62))


def _s_positive(sv) -> bool:
    return bool(np.all(sv.s >= 1e-10))


def _feature_design(plan: _Plan, seed: int, d: int, pkey: int = 0):
    """Draw one design plus per-point signals, redrawing on zero gaps.

    A design is rejected when a signal index lands on a zero gap, or when
    the plan runs a statistic that needs every gap strictly positive (the
    least squares / half-penalized family) and any gap is zero.
    """
    for attempt in range(25):
        dspec = plan.design_spec(plan.points[0], _derived_seed(seed, _R_DESIGN, pkey, d, attempt))
        x = gen_design(dspec)
        sv = _build_s(plan, gram(x))
        if plan.require_positive_s and not _s_positive(sv):
            log.debug("zero gaps in s; redrawing design (attempt %d)", attempt)
            continue
        tseed = _derived_seed(seed, _R_TRUTH, pkey, d, attempt)
        try:
            per_point = [gen_signal(plan.signal_spec(pt), sv, tseed) for pt in plan.points]
        except ZeroSAtSignalError:
            log.debug("zero gap at a signal index; redrawing design (attempt %d)", attempt)
            continue
        return x, sv, per_point
    raise InvalidSpecError("25 designs in a row had zero gaps where positive ones are required")


def _run_feature(plan: _Plan, seed: int, threads: int):
    offsets = (Offset.KNOCKOFF, Offset.KNOCKOFF_PLUS)

    def one_design(d):
        out = {}
        if plan.shared_designs:
            x, sv, per_point = _feature_design(plan, seed, d)
            model = build_knockoff(x, sv)
        for pi, point in enumerate(plan.points):
            if not plan.shared_designs:
                sub = _point_plan(plan, point)
                x, sv, per_point = _feature_design(sub, seed, d, pkey=pi)
                model = build_knockoff(x, sv)
                beta, truth = per_point[0]
            else:
                beta, truth = per_point[pi]
            for r in range(plan.n_reps):
                eps = stream(seed, _R_NOISE, pi, d, r).standard_normal(x.shape[0])
                y = x @ beta + plan.sigma * eps
                for kind in plan.statistics:
                    w = compute_stat(model, y, kind, path_cfg=plan.path_cfg)
                    for off in offsets:
                        res = knockoff_threshold(w.w, plan.q, off)
                        out.setdefault((pi, kind, off), []).append(evaluate(res, truth))
        return out

    t0 = time.perf_counter()
    per_design = _map_ordered(one_design, plan.n_designs, threads)
    wall = (time.perf_counter() - t0) / max(len(plan.points), 1)
    rows = []
    for pi, point in enumerate(plan.points):
        for kind in plan.statistics:
            plus = [r for d in per_design for r in d[(pi, kind, Offset.KNOCKOFF_PLUS)]]
            ko = [r for d in per_design for r in d[(pi, kind, Offset.KNOCKOFF)]]
            rows.append(_summarize(plan.label(point), kind.value, plus, ko, plan.q, wall))
    return rows


def _point_plan(plan: _Plan, point) -> _Plan:
    """A single-point view of a plan (used when designs depend on the point)."""
    import copy

    sub = copy.copy(plan)
    sub.points = [point]
    return sub


def _run_group(plan: _Plan, seed: int, threads: int):
    offsets = (Offset.KNOCKOFF, Offset.KNOCKOFF_PLUS)
    methods = plan.group_methods

    def prepare(x, groups):
        states = {}
        if "pca" in methods:
            states["pca"] = pca_prototype_model(x, groups, plan.prototypes_per_group)
        if "group-knockoff" in methods:
            states["group-knockoff"] = group_knockoff_prepare(x, groups, plan.path_cfg)
        return states

    def score(m, states, x, y, groups, split_key):
        if m == "pca":
            return pca_prototype_score(states["pca"], y, plan.group_statistic, plan.path_cfg)
        if m == "group-knockoff":
            return group_knockoff_score(states["group-knockoff"], y)
        if m == "split":
            return split_prototype_score(
                x, y, groups,
                split_seed=split_key,
                split_frac=plan.split_frac,
                statistic=plan.group_statistic,
                path_cfg=plan.path_cfg,
            )
        raise ValueError(f"unknown group method {m}")

    def one_design(d):
        out = {}
        if plan.shared_designs:
            groups0 = plan.groups_struct(plan.points[0])
            dspec = plan.design_spec(plan.points[0], _derived_seed(seed, _R_DESIGN, d, 0))
            x = gen_design(dspec)
            states = prepare(x, groups0)
        for pi, point in enumerate(plan.points):
            groups = plan.groups_struct(point)
            labels = groups.labels()
            if not plan.shared_designs:
                dspec = plan.design_spec(point, _derived_seed(seed, _R_DESIGN, pi, d, 0))
                x = gen_design(dspec)
                states = prepare(x, groups)
            beta, truth = gen_signal(
                plan.signal_spec(point), np.ones(groups.p), _derived_seed(seed, _R_TRUTH, pi, d, 0)
            )
            truth_groups = set(int(i) for i in np.unique(labels[truth])) if truth.size else set()
            for r in range(plan.n_reps):
                eps = stream(seed, _R_NOISE, pi, d, r).standard_normal(x.shape[0])
                y = x @ beta + plan.sigma * eps
                for m in methods:
                    w = score(m, states, x, y, groups, _derived_seed(seed, _R_SPLIT, pi, d, r))
                    for off in offsets:
                        res = knockoff_threshold(w, plan.q, off)
                        sel = set(int(i) for i in res.selected)
                        out.setdefault((pi, m, off), []).append(_group_report(sel, truth_groups))
        return out

    t0 = time.perf_counter()
    per_design = _map_ordered(one_design, plan.n_designs, threads)
    wall = (time.perf_counter() - t0) / max(len(plan.points), 1)
    rows = []
    for pi, point in enumerate(plan.points):
        for m in methods:
            plus = [r for d in per_design for r in d[(pi, m, Offset.KNOCKOFF_PLUS)]]
            ko = [r for d in per_design for r in d[(pi, m, Offset.KNOCKOFF)]]
            rows.append(_summarize(plan.label(point), m, plus, ko, plan.q, wall))
    return rows


def _group_report(selected: set, truth: set):
    n_sel = len(selected)
    n_true = len(selected & truth)
    return EvalReport(
        fdp=(n_sel - n_true) / max(n_sel, 1),
        power=n_true / max(len(truth), 1),
        n_selected=n_sel,
        n_true_selected=n_true,
    )


def run_experiment(preset: str, overrides=None, *, seed: int = 0, scale: str = "desk", threads: int = 1) -> ExperimentReport:
    """Run a named preset and return the aggregated report.

    ``overrides`` is a shallow dict applied onto the preset's resolved
    configuration (e.g. ``{"trials": 20, "points": [3, 5]}``); unknown keys
    raise ``ValueError``.
    """
    if preset not in PRESETS:
        raise KeyError(f"unknown preset {preset!r}; known: {sorted(PRESETS)}")
    if scale not in ("desk", "paper"):
        raise ValueError(f"scale must be 'desk' or 'paper', got {scale!r}")
    plan = PRESETS[preset](scale, dict(overrides or {}))
    plan.config.update({"preset": preset, "scale": scale, "seed": seed, "threads": threads})
    runner = _run_feature if plan.mode == "feature" else _run_group
    rows = runner(plan, seed, threads)
    return ExperimentReport(config=plan.config, rows=tuple(rows))


# --------------------------------------------------------------------------
# presets
# --------------------------------------------------------------------------


def _apply_overrides(cfg: dict, overrides: dict, allowed: set) -> dict:
    unknown = set(overrides) - allowed
    if unknown:
        raise ValueError(f"unknown override keys {sorted(unknown)}; allowed: {sorted(allowed)}")
    cfg.update(overrides)
    if "trials" in overrides and "n_reps" not in overrides:
        cfg["n_designs"] = overrides["trials"]
        cfg["n_reps"] = 1
    cfg["trials"] = cfg["n_designs"] * cfg["n_reps"]
    return cfg


def _norm_points(raw, names):
    """Accept [scalar, ...] (single parameter) or [dict, ...]."""
    pts = []
    for item in raw:
        if isinstance(item, dict):
            pts.append(item)
        else:
            pts.append({names[0]: item})
    return pts


_COMMON_KEYS = {
    "trials", "n_designs", "n_reps", "points", "q", "sigma", "n",
    "num_lambda", "lambda_min_ratio", "s_method", "s_alpha", "s_beta",
}


def _path_cfg(cfg) -> PathConfig:
    return PathConfig(cfg.get("num_lambda", 1000), cfg.get("lambda_min_ratio", 1e-3))


def _preset_two_block(scale, overrides):
    desk = dict(size_a=60, size_b=40, n=1000, rho=0.5, signals_a=12, signals_b=8,
                n_designs=100, n_reps=1, q=0.2, sigma=1.0, s_method="msdp", s_alpha=0.5, s_beta=0.75,
                points=list(range(1, 11)), statistics=["least-squares", "marginal-corr"])
    paper = dict(desk, size_a=600, size_b=400, n=3000, signals_a=120, signals_b=80, n_designs=200)
    cfg = _apply_overrides(
        paper if scale == "paper" else desk,
        overrides,
        _COMMON_KEYS | {"size_a", "size_b", "rho", "signals_a", "signals_b", "statistics"},
    )
    points = _norm_points(cfg["points"], ["M"])
    a, b = cfg["size_a"], cfg["size_b"]

    def design_spec(point, dseed):
        return DesignSpec(DesignKind.TWO_BLOCK_SIGN, cfg["n"], (a, b), rho=cfg["rho"], seed=dseed)

    def signal_spec(point):
        return SignalSpec(
            SignalKind.OVER_S,
            point["M"],
            (
                SignalBlock(np.arange(a), cfg["signals_a"], 0.9),
                SignalBlock(np.arange(a, a + b), cfg["signals_b"], 1.0),
            ),
        )

    return _Plan(
        mode="feature", config=cfg, points=points, label=lambda pt: f"M={pt['M']}",
        design_spec=design_spec, signal_spec=signal_spec,
        n_designs=cfg["n_designs"], n_reps=cfg["n_reps"], q=cfg["q"], sigma=cfg["sigma"],
        statistics=[StatKind(s) for s in cfg["statistics"]], s_method=cfg["s_method"],
        s_alpha=cfg["s_alpha"], s_beta=cfg["s_beta"],
        path_cfg=_path_cfg(cfg),
    )


def _preset_alt_sign(scale, overrides):
    desk = dict(size_a1=40, size_b1=40, rho=0.3, rho2=0.9, M=6.0, sparsity=0.2,
                n_designs=200, n_reps=1, q=0.2, sigma=1.0, s_method="msdp", s_alpha=0.5, s_beta=0.75,
                points=[4, 8, 12],
                statistics=["least-squares", "weighted-half-lasso", "lasso-path",
                            "forward-selection", "omp"])
    paper = dict(desk, size_a1=200, size_b1=200, points=list(range(20, 201, 20)))
    cfg = _apply_overrides(
        paper if scale == "paper" else desk,
        overrides,
        _COMMON_KEYS | {"size_a1", "size_b1", "rho", "rho2", "M", "sparsity", "statistics"},
    )
    cfg.pop("n", None)  # n is derived (3p) per point
    points = _norm_points(cfg["points"], ["k"])

    def sizes(point):
        k = point["k"]
        return (cfg["size_a1"], 2 * k, cfg["size_b1"], k)

    def design_spec(point, dseed):
        sz = sizes(point)
        return DesignSpec(
            DesignKind.FOUR_BLOCK_ALT, 3 * sum(sz), sz, rho=cfg["rho"], rho2=cfg["rho2"], seed=dseed
        )

    def signal_spec(point):
        p = sum(sizes(point))
        return SignalSpec(
            SignalKind.OVER_S, cfg["M"], (SignalBlock(np.arange(p), round(cfg["sparsity"] * p)),)
        )

    return _Plan(
        mode="feature", config=cfg, points=points, label=lambda pt: f"k={pt['k']}",
        design_spec=design_spec, signal_spec=signal_spec,
        n_designs=cfg["n_designs"], n_reps=cfg["n_reps"], q=cfg["q"], sigma=cfg["sigma"],
        statistics=[StatKind(s) for s in cfg["statistics"]], s_method=cfg["s_method"],
        s_alpha=cfg["s_alpha"], s_beta=cfg["s_beta"],
        path_cfg=_path_cfg(cfg), shared_designs=False,
    )


def _preset_null(scale, overrides):
    desk = dict(n=300, p=100, n_designs=50, n_reps=1, q=0.2, sigma=1.0, s_method="msdp", s_alpha=0.5, s_beta=0.75,
                points=[0.0], statistics=["least-squares", "marginal-corr"])
    paper = dict(desk, n_designs=200)
    cfg = _apply_overrides(
        paper if scale == "paper" else desk,
        overrides, _COMMON_KEYS | {"p", "statistics"},
    )
    points = _norm_points(cfg["points"], ["M"])

    def design_spec(point, dseed):
        return DesignSpec(DesignKind.IID_GAUSS, cfg["n"], (cfg["p"],), seed=dseed)

    def signal_spec(point):
        return SignalSpec(SignalKind.FIXED_AMPLITUDE, 0.0, (SignalBlock(np.arange(cfg["p"]), 0),))

    return _Plan(
        mode="feature", config=cfg, points=points, label=lambda pt: "null",
        design_spec=design_spec, signal_spec=signal_spec,
        n_designs=cfg["n_designs"], n_reps=cfg["n_reps"], q=cfg["q"], sigma=cfg["sigma"],
        statistics=[StatKind(s) for s in cfg["statistics"]], s_method=cfg["s_method"],
        s_alpha=cfg["s_alpha"], s_beta=cfg["s_beta"],
        path_cfg=_path_cfg(cfg),
    )


def _preset_fdr_stats(scale, overrides):
    desk = dict(n=300, p=100, n_signals=20, amplitude=3.5, n_designs=200, n_reps=1,
                q=0.2, sigma=1.0, s_method="msdp", s_alpha=0.5, s_beta=0.75, points=[3.5],
                statistics=[k.value for k in StatKind])
    paper = dict(desk, n_designs=1000)
    cfg = _apply_overrides(
        paper if scale == "paper" else desk,
        overrides, _COMMON_KEYS | {"p", "n_signals", "amplitude", "statistics"},
    )
    points = _norm_points(cfg["points"], ["M"])

    def design_spec(point, dseed):
        return DesignSpec(DesignKind.IID_GAUSS, cfg["n"], (cfg["p"],), seed=dseed)

    def signal_spec(point):
        return SignalSpec(
            SignalKind.FIXED_AMPLITUDE, point["M"], (SignalBlock(np.arange(cfg["p"]), cfg["n_signals"]),)
        )

    return _Plan(
        mode="feature", config=cfg, points=points, label=lambda pt: f"M={pt['M']}",
        design_spec=design_spec, signal_spec=signal_spec,
        n_designs=cfg["n_designs"], n_reps=cfg["n_reps"], q=cfg["q"], sigma=cfg["sigma"],
        statistics=[StatKind(s) for s in cfg["statistics"]], s_method=cfg["s_method"],
        s_alpha=cfg["s_alpha"], s_beta=cfg["s_beta"],
        path_cfg=_path_cfg(cfg),
    )


def _preset_prototype_compare(scale, overrides):
    desk = dict(n=400, n_groups=10, group_size=10, rho=0.5, gamma=0.0,
                signal_groups=5, n_designs=10, n_reps=10, q=0.2, sigma=1.0,
                points=[{"M": 3.0, "signals_per_group": 1}, {"M": 5.0, "signals_per_group": 1}],
                methods=["pca", "split"], statistic="lasso-path", split_frac=1.0 / 3.0,
                prototypes_per_group=1)
    paper = dict(desk, n_designs=20, n_reps=250,
                 points=[{"M": float(m), "signals_per_group": c} for c in (1, 2, 3) for m in range(1, 10)])
    cfg = _apply_overrides(
        paper if scale == "paper" else desk,
        overrides,
        _COMMON_KEYS
        | {"n_groups", "group_size", "rho", "gamma", "signal_groups", "methods", "statistic",
           "split_frac", "prototypes_per_group"},
    )
    points = _norm_points(cfg["points"], ["M"])
    gsize, k = cfg["group_size"], cfg["n_groups"]
    sizes = (gsize,) * k

    def design_spec(point, dseed):
        return DesignSpec(DesignKind.GROUP_EQUI, cfg["n"], sizes, rho=cfg["rho"], gamma=cfg["gamma"], seed=dseed)

    def signal_spec(point):
        c = point.get("signals_per_group", 1)
        idx = np.array([g * gsize + j for g in range(cfg["signal_groups"]) for j in range(c)])
        return SignalSpec(SignalKind.FIXED_AMPLITUDE, point["M"], (SignalBlock(idx, idx.size),))

    return _Plan(
        mode="group", config=cfg, points=points,
        label=lambda pt: f"M={pt['M']},spg={pt.get('signals_per_group', 1)}",
        design_spec=design_spec, signal_spec=signal_spec,
        n_designs=cfg["n_designs"], n_reps=cfg["n_reps"], q=cfg["q"], sigma=cfg["sigma"],
        groups_struct=lambda pt: GroupStructure.from_sizes(sizes),
        group_methods=cfg["methods"], group_statistic=StatKind(cfg["statistic"]),
        path_cfg=_path_cfg(cfg), split_frac=cfg["split_frac"],
        prototypes_per_group=cfg["prototypes_per_group"],
    )


def _preset_group_compare(scale, overrides):
    desk = dict(n=600, n_groups=40, group_size=5, signal_groups=20, amplitude=3.5,
                n_designs=100, n_reps=1, q=0.2, sigma=1.0,
                points=[{"rho": 0.5, "gamma": 0.0}, {"rho": 0.9, "gamma": 0.0}],
                methods=["pca", "group-knockoff", "split"], statistic="lasso-path",
                split_frac=1.0 / 3.0, prototypes_per_group=1)
    paper = dict(desk, n=3000, n_groups=200,
                 points=[{"rho": round(r, 1), "gamma": 0.0} for r in np.arange(0, 1, 0.1)]
                 + [{"rho": 0.5, "gamma": round(g, 1)} for g in np.arange(0, 1, 0.1)]
                 + [{"rho": 0.9, "gamma": round(g, 1)} for g in np.arange(0, 1, 0.1)])
    cfg = _apply_overrides(
        paper if scale == "paper" else desk,
        overrides,
        _COMMON_KEYS
        | {"n_groups", "group_size", "signal_groups", "amplitude", "methods", "statistic",
           "split_frac", "prototypes_per_group"},
    )
    points = _norm_points(cfg["points"], ["rho"])
    gsize, k = cfg["group_size"], cfg["n_groups"]
    sizes = (gsize,) * k
    first_feats = np.arange(0, k * gsize, gsize)

    def design_spec(point, dseed):
        return DesignSpec(
            DesignKind.GROUP_EQUI, cfg["n"], sizes,
            rho=point["rho"], gamma=point.get("gamma", 0.0), seed=dseed,
        )

    def signal_spec(point):
        return SignalSpec(
            SignalKind.PLUS_MINUS, cfg["amplitude"], (SignalBlock(first_feats, cfg["signal_groups"]),)
        )

    return _Plan(
        mode="group", config=cfg, points=points,
        label=lambda pt: f"rho={pt['rho']},gamma={pt.get('gamma', 0.0)}",
        design_spec=design_spec, signal_spec=signal_spec,
        n_designs=cfg["n_designs"], n_reps=cfg["n_reps"], q=cfg["q"], sigma=cfg["sigma"],
        groups_struct=lambda pt: GroupStructure.from_sizes(sizes),
        group_methods=cfg["methods"], group_statistic=StatKind(cfg["statistic"]),
        path_cfg=_path_cfg(cfg), split_frac=cfg["split_frac"], shared_designs=False,
        prototypes_per_group=cfg["prototypes_per_group"],
    )


def _preset_group_sizes(scale, overrides):
    desk = dict(n=600, n_small=20, small_size=5, n_large=4, large_size=25, amplitude=3.5,
                n_designs=50, n_reps=1, q=0.2, sigma=1.0, rho=0.5, gamma=0.0,
                points=[{"k1": 4, "k2": 1}, {"k1": 8, "k2": 2}, {"k1": 12, "k2": 3}],
                methods=["pca", "group-knockoff"], statistic="lasso-path",
                split_frac=1.0 / 3.0, prototypes_per_group=1)
    paper = dict(desk, n=3000, n_small=100, n_large=20, n_designs=100,
                 points=[{"k1": 4 * i, "k2": i} for i in range(1, 11)])
    cfg = _apply_overrides(
        paper if scale == "paper" else desk,
        overrides,
        _COMMON_KEYS
        | {"n_small", "small_size", "n_large", "large_size", "amplitude", "rho", "gamma",
           "methods", "statistic", "split_frac", "prototypes_per_group"},
    )
    points = _norm_points(cfg["points"], ["k1"])
    sizes = (cfg["small_size"],) * cfg["n_small"] + (cfg["large_size"],) * cfg["n_large"]
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    small_first = bounds[: cfg["n_small"]]
    large_first = bounds[cfg["n_small"] : cfg["n_small"] + cfg["n_large"]]

    def design_spec(point, dseed):
        return DesignSpec(
            DesignKind.GROUP_TWO_SIZES, cfg["n"], sizes, rho=cfg["rho"], gamma=cfg["gamma"], seed=dseed
        )

    def signal_spec(point):
        return SignalSpec(
            SignalKind.PLUS_MINUS,
            cfg["amplitude"],
            (
                SignalBlock(small_first, point["k1"]),
                SignalBlock(large_first, point["k2"]),
            ),
        )

    return _Plan(
        mode="group", config=cfg, points=points,
        label=lambda pt: f"k1={pt['k1']},k2={pt['k2']}",
        design_spec=design_spec, signal_spec=signal_spec,
        n_designs=cfg["n_designs"], n_reps=cfg["n_reps"], q=cfg["q"], sigma=cfg["sigma"],
        groups_struct=lambda pt: GroupStructure.from_sizes(sizes),
        group_methods=cfg["methods"], group_statistic=StatKind(cfg["statistic"]),
        path_cfg=_path_cfg(cfg), split_frac=cfg["split_frac"],
        prototypes_per_group=cfg["prototypes_per_group"],
    )


PRESETS = {
    "two-block": _preset_two_block,
    "alt-sign": _preset_alt_sign,
    "null": _preset_null,
    "fdr-stats": _preset_fdr_stats,
    "prototype-compare": _preset_prototype_compare,
    "group-compare": _preset_group_compare,
    "group-sizes": _preset_group_sizes,
}
