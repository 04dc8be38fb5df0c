"""Command-line front end.

Commands: ``select``, ``group-select``, ``experiment``, ``validate``,
``estimate-sigma``.  Matrices are plain comma-delimited CSV (no header by
default, ``--header`` skips one line); group structures are JSON arrays of
1-based index arrays; selected indices in the output JSON are 1-based.

Exit codes: 0 success, 2 infeasible/numerical failure, 3 I/O error,
4 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .construct import build_knockoff, s_equivariant, s_modified_sdp, s_sdp, validate_knockoff
from .exceptions import KnockoffError
from .groups import (
    GroupStructure,
    group_knockoff_filter,
    pca_prototype_filter,
    split_prototype_filter,
)
from .linalg import gram
from .selection import Offset, knockoff_threshold
from .simlab import PRESETS, run_experiment
from .stats import NoComplementError, PathConfig, StatKind, compute_stat, estimate_sigma

STAT_NAMES = [k.value for k in StatKind]
GROUP_METHODS = ["pca", "group-knockoff", "split"]

EXIT_OK = 0
EXIT_NUMERIC = 2
EXIT_IO = 3
EXIT_USAGE = 4


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; we reserve 2 for numerics."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _load_matrix(path: str, header: bool, ndmin: int = 2) -> np.ndarray:
    try:
        arr = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=ndmin)
    except OSError as exc:
        raise _IOFailure(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise _IOFailure(f"malformed CSV in {path}: {exc}") from exc
    return arr


class _IOFailure(Exception):
    pass


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=False)
    if out:
        try:
            with open(out, "w") as fh:
                fh.write(text)
                fh.write("\n")
        except OSError as exc:
            raise _IOFailure(f"cannot write {out}: {exc}") from exc
    else:
        print(text)


def _jsonable(x):
    if isinstance(x, float) and not np.isfinite(x):
        return None
    if isinstance(x, np.ndarray):
        return [_jsonable(float(v)) for v in x]
    return x


def _build_s(sigma, method: str, alpha: float, beta: float):
    if method == "equi":
        return s_equivariant(sigma)
    if method == "sdp":
        return s_sdp(sigma)
    return s_modified_sdp(sigma, alpha, beta)


def _config_echo(args, keys) -> dict:
    return {k: getattr(args, k.replace("-", "_")) for k in keys}


def _groups_arg(text: str) -> GroupStructure:
    text = text.strip()
    if not text.startswith("["):
        try:
            with open(text) as fh:
                text = fh.read()
        except OSError as exc:
            raise _IOFailure(f"cannot read groups file {text!r}: {exc}") from exc
    return GroupStructure.from_json(text)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _cmd_select(args) -> int:
    x = _load_matrix(args.x, args.header)
    y = _load_matrix(args.y, args.header, ndmin=1).ravel()
    if y.shape[0] != x.shape[0]:
        raise _IOFailure(f"X has {x.shape[0]} rows but y has {y.shape[0]}")
    sv = _build_s(gram(x), args.method, args.alpha, args.beta)
    model = build_knockoff(x, sv)
    w = compute_stat(
        model,
        y,
        StatKind(args.stat),
        path_cfg=PathConfig(args.num_lambda, args.lambda_min_ratio),
    )
    offset = Offset.KNOCKOFF_PLUS if args.plus else Offset.KNOCKOFF
    res = knockoff_threshold(w.w, args.q, offset)
    try:
        sigma_hat = estimate_sigma(model, y).sigma_hat
    except NoComplementError:
        sigma_hat = None
    _emit(
        {
            "config": _config_echo(
                args,
                ["x", "y", "stat", "q", "plus", "seed", "method", "alpha", "beta",
                 "num_lambda", "lambda_min_ratio", "header"],
            ),
            "selected": [int(j) + 1 for j in res.selected],
            "threshold": _jsonable(res.threshold),
            "W": _jsonable(w.w),
            "s": _jsonable(sv.s),
            "s_method": sv.method.value if sv.method else None,
            "sigma_hat": sigma_hat,
        },
        args.out,
    )
    return EXIT_OK


def _cmd_group_select(args) -> int:
    x = _load_matrix(args.x, args.header)
    y = _load_matrix(args.y, args.header, ndmin=1).ravel()
    groups = _groups_arg(args.groups)
    offset = Offset.KNOCKOFF_PLUS if args.plus else Offset.KNOCKOFF
    cfg = PathConfig(args.num_lambda, args.lambda_min_ratio)
    if args.group_method == "pca":
        res = pca_prototype_filter(
            x, y, groups, args.q, offset, StatKind(args.stat), args.prototypes, cfg
        )
    elif args.group_method == "group-knockoff":
        res = group_knockoff_filter(x, y, groups, args.q, offset, cfg)
    else:
        res = split_prototype_filter(
            x, y, groups, args.q, offset, args.seed, args.split_frac, StatKind(args.stat), cfg
        )
    _emit(
        {
            "config": _config_echo(
                args,
                ["x", "y", "groups", "group_method", "stat", "q", "plus", "seed",
                 "prototypes", "split_frac", "num_lambda", "lambda_min_ratio", "header"],
            ),
            "selected_groups": [int(j) + 1 for j in res.selected_groups],
            "threshold": _jsonable(res.threshold),
            "W_group": _jsonable(res.w_group),
        },
        args.out,
    )
    return EXIT_OK


def _cmd_experiment(args) -> int:
    if args.preset not in PRESETS:
        sys.stderr.write(f"error: unknown preset {args.preset!r}; known: {sorted(PRESETS)}\n")
        return EXIT_USAGE
    overrides = dict(args.config_data.get("overrides", {}))
    if args.overrides:
        overrides.update(json.loads(args.overrides))
    if args.trials is not None:
        overrides["trials"] = args.trials
    try:
        report = run_experiment(
            args.preset, overrides, seed=args.seed, scale=args.scale, threads=args.threads
        )
    except (ValueError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    prefix = args.out or f"experiment-{args.preset}"
    try:
        report.write_csv(prefix + ".csv")
        report.write_json(prefix + ".json")
    except OSError as exc:
        raise _IOFailure(str(exc)) from exc
    for row in report.rows:
        sys.stderr.write(
            f"[{row.point} {row.method}] FDR+={row.fdr_plus:.3f} power+={row.power_plus:.3f} "
            f"({row.wall_time_s:.1f}s)\n"
        )
    print(prefix + ".csv")
    print(prefix + ".json")
    return EXIT_OK


def _cmd_validate(args) -> int:
    x = _load_matrix(args.x, args.header)
    sv = _build_s(gram(x), args.method, args.alpha, args.beta)
    model = build_knockoff(x, sv)
    report = validate_knockoff(model)
    print(f"gram mismatch:       {report.gram_mismatch:.3e}")
    print(f"cross mismatch:      {report.cross_mismatch:.3e}")
    print(f"complement mismatch: {report.complement_mismatch:.3e}")
    print(f"pass (1e-8):         {report.passed}")
    for j in report.zero_s:
        sys.stderr.write(
            f"warning: s[{j + 1}] < 1e-10; feature {j + 1} can never be selected\n"
        )
    return EXIT_OK if report.passed else EXIT_NUMERIC


def _cmd_estimate_sigma(args) -> int:
    x = _load_matrix(args.x, args.header)
    y = _load_matrix(args.y, args.header, ndmin=1).ravel()
    sv = _build_s(gram(x), args.method, args.alpha, args.beta)
    model = build_knockoff(x, sv)
    est = estimate_sigma(model, y)
    _emit(
        {
            "config": _config_echo(args, ["x", "y", "method", "alpha", "beta", "header"]),
            "sigma_hat": est.sigma_hat,
            "dof": est.dof,
        },
        args.out,
    )
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _add_common(p, with_stat=True):
    p.add_argument("--q", type=float, default=0.2, help="nominal FDR level (default 0.2)")
    p.add_argument("--plus", action="store_true", help="use the knockoff+ offset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--header", action="store_true", help="skip one CSV header line")
    p.add_argument("--method", choices=["equi", "sdp", "msdp"], default="msdp",
                   help="s-vector construction")
    p.add_argument("--alpha", type=float, default=0.5, help="modified-SDP floor factor")
    p.add_argument("--beta", type=float, default=0.75, help="modified-SDP shrink factor")
    p.add_argument("--num-lambda", type=int, default=1000)
    p.add_argument("--lambda-min-ratio", type=float, default=1e-3)
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    if with_stat:
        p.add_argument("--stat", choices=STAT_NAMES, default="least-squares")


def build_parser() -> tuple[_Parser, list]:
    parser = _Parser(prog="knockoffs", description=__doc__)
    parser.add_argument("--config", default=None, help="JSON file with flag defaults (flags win)")
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = []

    p = sub.add_parser("select", help="FDR-controlled selection on a CSV design/response")
    subparsers.append(p)
    p.add_argument("x", help="design matrix CSV (n rows, p columns)")
    p.add_argument("y", help="response CSV (n rows)")
    _add_common(p)
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("group-select", help="group-FDR-controlled selection")
    subparsers.append(p)
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--groups", required=True, help="JSON array of 1-based index arrays, or a path")
    p.add_argument("--group-method", choices=GROUP_METHODS, default="pca")
    p.add_argument("--prototypes", type=int, default=1, help="prototypes per group (pca)")
    p.add_argument("--split-frac", type=float, default=1.0 / 3.0, help="first-split fraction (split)")
    _add_common(p)
    p.set_defaults(func=_cmd_group_select)

    p = sub.add_parser("experiment", help="run a simulation preset, write CSV + JSON")
    subparsers.append(p)
    p.add_argument("preset", help=f"one of {sorted(PRESETS)}")
    p.add_argument("--scale", choices=["desk", "paper"], default="desk")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--overrides", default=None, help="JSON dict of preset overrides")
    p.add_argument("--out", default=None, help="output path prefix")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("validate", help="build knockoffs for a CSV design and check invariants")
    subparsers.append(p)
    p.add_argument("x")
    _add_common(p, with_stat=False)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("estimate-sigma", help="orthogonal-complement noise estimate")
    subparsers.append(p)
    p.add_argument("x")
    p.add_argument("y")
    _add_common(p, with_stat=False)
    p.set_defaults(func=_cmd_estimate_sigma)

    return parser, subparsers


def _load_config_file(argv) -> dict:
    """Pre-scan argv for --config and load it; returns {} when absent."""
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise _IOFailure(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _IOFailure(f"malformed config {path}: {exc}") from exc


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()
    try:
        config_data = _load_config_file(argv)
        flag_defaults = {
            k.replace("-", "_"): v for k, v in config_data.items() if k != "overrides"
        }
        for sp in subparsers:
            sp.set_defaults(**flag_defaults)
        args = parser.parse_args(argv)
        args.config_data = config_data
        return args.func(args)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    except _IOFailure as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO
    except KnockoffError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
