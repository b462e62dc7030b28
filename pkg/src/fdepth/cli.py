"""Command line entry point: ``fdepth {depth,classify,simulate,experiment,cv}``.

Exit codes: 0 on success, 2 on a configuration error, 3 on a data error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from .classify import ClassifierSpec, Method, predict
from .core import ConfigError, DepthKind, DepthSpec, FdepthError, LabeledSample, ParseError, derive_seed
from .datasets import format_curves_csv, load_curves_csv
from .depths import compute_depth
from .experiments import (
    MethodSpec,
    emit_cv_table,
    emit_table,
    emit_timing_table,
    load_config,
    ordinal,
    run_experiment,
    summarize_results,
)
from .modelselect import DEFAULT_PERCENTILES, cv_select_percentile, make_cv_plan
from .simulate import CgpSpec, generate_cgp

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3


def _write(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _rows(header: List[str], rows: List[list], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buf.getvalue()
    lines = ["| " + " | ".join(header) + " |", "|---" * len(header) + "|"]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def _labeled(path: str) -> LabeledSample:
    table = load_curves_csv(path)
    if not table.is_labeled:
        raise ParseError(f"{path}: classification needs every training curve labeled 0 or 1")
    return table.to_labeled()


def _parse_method(text: str) -> MethodSpec:
    try:
        return MethodSpec.parse(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _cv_method(text: str) -> MethodSpec:
    method = _parse_method(text if "+" in text or text.strip().upper() in ("KNN", "K-NN") else text + "+KFSD")
    if method.method is Method.KNN:
        raise ConfigError("k-NN has no bandwidth to select")
    if method.depth is not DepthKind.KFSD or method.percentile is not None:
        raise ConfigError("percentile selection applies to KFSD without a fixed percentile")
    return method


def _depth_spec(kind: str, percentile: Optional[float], seed: int, projections: int) -> DepthSpec:
    try:
        kind = DepthKind(kind.upper())
    except ValueError:
        raise ConfigError(f"unknown depth {kind!r}") from None
    if kind is DepthKind.KFSD and percentile is None:
        raise ConfigError("KFSD needs --percentile")
    if kind in (DepthKind.RTD, DepthKind.IDD):
        return DepthSpec(kind, num_projections=projections, projection_seed=seed)
    return DepthSpec.default(kind, percentile=percentile)


def cmd_depth(args) -> int:
    table = load_curves_csv(args.data)
    ref = table.to_sample()
    if args.group is not None:
        ref = table.to_labeled().group(args.group)
    queries = load_curves_csv(args.queries).to_sample() if args.queries else table.to_sample()
    if queries.grid != ref.grid:
        raise ParseError("query curves are on a different grid")
    spec = _depth_spec(args.depth, args.percentile, args.seed, args.projections)
    values = np.atleast_1d(compute_depth(ref, queries.values, spec, normalized_hmd=not args.raw_hmd))
    rows = [[i, f"{v:.12g}"] for i, v in enumerate(values)]
    _write(_rows(["curve", spec.name], rows, args.format), args.out)
    return EXIT_OK


def _classifier(train: LabeledSample, method: MethodSpec, args) -> ClassifierSpec:
    tie_seed = derive_seed(args.seed, 2)
    if method.method is Method.KNN:
        return ClassifierSpec(Method.KNN, k=args.k, tie_seed=tie_seed)
    kind = method.depth
    pct = method.percentile
    if kind is DepthKind.KFSD and pct is None:
        probe = ClassifierSpec(method.method, DepthSpec(kind, bandwidth_percentile=DEFAULT_PERCENTILES[0]),
                               alpha=args.alpha if method.method is Method.DTM else None)
        plan = make_cv_plan(train, args.folds, derive_seed(args.seed, 3))
        pct = cv_select_percentile(train, probe, DEFAULT_PERCENTILES, plan).percentile
    if kind in (DepthKind.RTD, DepthKind.IDD):
        depth = DepthSpec(kind, num_projections=args.projections, projection_seed=derive_seed(args.seed, 1))
    else:
        depth = DepthSpec.default(kind, percentile=pct)
    alpha = args.alpha if method.method is Method.DTM else None
    return ClassifierSpec(method.method, depth, alpha=alpha, tie_seed=tie_seed)


def cmd_classify(args) -> int:
    method = _parse_method(args.method)
    train = _labeled(args.train)
    test = load_curves_csv(args.test)
    if test.to_sample().grid != train.grid:
        raise ParseError("test curves are on a different grid")
    spec = _classifier(train, method, args)
    preds = predict(train, test.rows, spec)
    rows = []
    for i, p in enumerate(preds):
        truth = "-" if test.labels[i] < 0 else int(test.labels[i])
        rows.append([i, p.label, truth, f"{p.scores[0]:.12g}", f"{p.scores[1]:.12g}", int(p.tie_broken)])
    text = _rows(["curve", "predicted", "label", "score0", "score1", "tie"], rows, args.format)
    _write(text, args.out)
    if test.is_labeled:
        wrong = sum(p.label != t for p, t in zip(preds, test.labels))
        print(f"{spec.name}: {wrong} of {len(preds)} misclassified", file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        spec = CgpSpec(args.model.upper(), n0=args.n0, n1=args.n1, contaminated=args.contaminated,
                       q=args.q, grid_points=args.grid_points, seed=args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    data = generate_cgp(spec)
    _write(format_curves_csv(data.grid.points, data.values, data.labels), args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.replications is not None:
        changes["replications"] = args.replications
    if args.format is not None:
        changes["format"] = args.format
    if args.out is not None:
        changes["output"] = args.out
    if changes:
        cfg = replace(cfg, **changes)
    results = run_experiment(cfg, workers=args.workers)
    summary = summarize_results(results, cfg)
    text = emit_table(summary, cfg.format)
    if cfg.format == "markdown":
        if any(ms.cv_candidates_differ is not None for ms in summary.methods.values()):
            text += "\n" + emit_cv_table(summary)
        if summary.timings:
            text += "\n" + emit_timing_table(summary)
    _write(text, cfg.output)
    return EXIT_OK


def cmd_cv(args) -> int:
    train = _labeled(args.data)
    method = _cv_method(args.method)
    grid = tuple(args.percentiles) if args.percentiles else DEFAULT_PERCENTILES
    probe = ClassifierSpec(method.method, DepthSpec(DepthKind.KFSD, bandwidth_percentile=grid[0]),
                           alpha=args.alpha if method.method is Method.DTM else None)
    plan = make_cv_plan(train, args.folds, args.seed)
    choice = cv_select_percentile(train, probe, grid, plan)
    rows = [[f"{p:g}", choice.errors[p], "" if p not in choice.secondary else f"{choice.secondary[p]:.12g}",
             "*" if p == choice.percentile else ""] for p in grid]
    text = _rows(["percentile", "cv_errors", "secondary", "selected"], rows, args.format)
    _write(text, args.out)
    print(f"selected {ordinal(choice.percentile)} percentile (decided at {choice.tie_level.value} level)", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdepth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed_default: Optional[int] = 0):
        p.add_argument("--seed", type=int, default=seed_default)
        p.add_argument("--format", choices=("csv", "markdown"), default=None if seed_default is None else "csv")
        p.add_argument("--out", help="write output here instead of stdout")

    p = sub.add_parser("depth", help="depth of curves relative to a sample")
    p.add_argument("--data", required=True, help="reference curves (CSV)")
    p.add_argument("--depth", required=True, help="FMD, HMD, RTD, IDD, MBD, FSD or KFSD")
    p.add_argument("--queries", help="curves to score (default: the reference curves)")
    p.add_argument("--group", type=int, choices=(0, 1), help="use only this label as reference")
    p.add_argument("--percentile", type=float, help="bandwidth percentile for HMD/KFSD")
    p.add_argument("--projections", type=int, default=50)
    p.add_argument("--raw-hmd", action="store_true", help="report HMD without normalization")
    common(p)
    p.set_defaults(func=cmd_depth)

    p = sub.add_parser("classify", help="classify test curves")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--method", required=True, help="e.g. WMD+KFSD, WMD+KFSD@15, DTM+MBD, KNN")
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--projections", type=int, default=50)
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simulate", help="draw a labeled sample from CGP1-CGP4")
    p.add_argument("--model", default="CGP1")
    p.add_argument("--contaminated", action="store_true")
    p.add_argument("--q", type=float, default=0.10)
    p.add_argument("--n0", type=int, default=50)
    p.add_argument("--n1", type=int, default=50)
    p.add_argument("--grid-points", type=int, default=51)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="run a replicated study from a config file")
    p.add_argument("config")
    p.add_argument("--replications", type=int)
    p.add_argument("--workers", type=int, default=1)
    common(p, seed_default=None)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("cv", help="cross-validated KFSD percentile choice")
    p.add_argument("--data", required=True)
    p.add_argument("--method", required=True, help="DTM, WAD or WMD")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--percentiles", type=float, nargs="+")
    common(p)
    p.set_defaults(func=cmd_cv)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FdepthError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
