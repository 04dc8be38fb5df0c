"""Knockoff/knockoff+ thresholding and FDR/power evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .exceptions import EmptyInputError

__all__ = [
    "Offset",
    "SelectionResult",
    "EvalReport",
    "McSummary",
    "knockoff_threshold",
    "evaluate",
    "monte_carlo_fdr",
]


class Offset(IntEnum):
    """Numerator offset of the threshold rule: 0 = knockoff, 1 = knockoff+."""

    KNOCKOFF = 0
    KNOCKOFF_PLUS = 1


@dataclass(frozen=True, eq=False)
class SelectionResult:
    threshold: float  # +inf when nothing qualifies
    selected: np.ndarray  # sorted 0-based indices
    offset: Offset
    q: float


@dataclass(frozen=True)
class EvalReport:
    fdp: float
    power: float
    n_selected: int
    n_true_selected: int


@dataclass(frozen=True)
class McSummary:
    """Monte Carlo aggregate: mean FDP/power/mFDP with standard errors."""

    fdr: float
    power: float
    mfdr: float
    fdr_se: float
    power_se: float
    mfdr_se: float
    mean_selected: float
    n_trials: int


def knockoff_threshold(w, q: float, offset: Offset = Offset.KNOCKOFF) -> SelectionResult:
    """Smallest t in {|w_j| : w_j != 0} with (offset + #{w <= -t}) / (#{w >= t} v 1) <= q.

    Returns threshold +inf and an empty selection when no candidate
    qualifies.  Zero statistics count on neither side at any t > 0.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError(f"q must be in (0, 1], got {q}")
    if hasattr(w, "w"):  # accept a StatVector
        w = w.w
    w = np.asarray(w, dtype=float)
    offset = Offset(offset)
    candidates = np.unique(np.abs(w[w != 0.0]))
    if candidates.size == 0:
        return SelectionResult(np.inf, np.empty(0, dtype=int), offset, q)
    w_sorted = np.sort(w)
    n = w_sorted.size
    # counts at every candidate t, vectorized over the candidate grid
    n_neg = np.searchsorted(w_sorted, -candidates, side="right")
    n_pos = n - np.searchsorted(w_sorted, candidates, side="left")
    ratio = (int(offset) + n_neg) / np.maximum(n_pos, 1)
    ok = np.flatnonzero(ratio <= q)
    if ok.size == 0:
        return SelectionResult(np.inf, np.empty(0, dtype=int), offset, q)
    t = float(candidates[ok[0]])
    selected = np.flatnonzero(w >= t)
    return SelectionResult(t, selected, offset, q)


def evaluate(result: SelectionResult, truth) -> EvalReport:
    """False discovery proportion and power of one selection against a truth set."""
    truth = set(int(i) for i in truth)
    selected = set(int(i) for i in result.selected)
    n_sel = len(selected)
    n_true_sel = len(selected & truth)
    fdp = (n_sel - n_true_sel) / max(n_sel, 1)
    power = n_true_sel / max(len(truth), 1)
    return EvalReport(fdp=fdp, power=power, n_selected=n_sel, n_true_selected=n_true_sel)


def monte_carlo_fdr(trials, q: float) -> McSummary:
    """Aggregate trial reports: FDR/power estimates and the mFDR estimate.

    The mFDR estimate is the mean of ``false / (selected + 1/q)`` across
    trials; standard errors are the sample standard deviations of the
    per-trial proportions divided by sqrt(#trials).
    """
    trials = list(trials)
    if not trials:
        raise EmptyInputError("no trials to aggregate")
    fdp = np.array([t.fdp for t in trials])
    power = np.array([t.power for t in trials])
    n_sel = np.array([t.n_selected for t in trials], dtype=float)
    false = np.array([t.n_selected - t.n_true_selected for t in trials], dtype=float)
    mfdp = false / (n_sel + 1.0 / q)
    m = len(trials)

    def se(x):
        return float(np.std(x, ddof=1) / np.sqrt(m)) if m > 1 else 0.0

    return McSummary(
        fdr=float(fdp.mean()),
        power=float(power.mean()),
        mfdr=float(mfdp.mean()),
        fdr_se=se(fdp),
        power_se=se(power),
        mfdr_se=se(mfdp),
        mean_selected=float(n_sel.mean()),
        n_trials=m,
    )
