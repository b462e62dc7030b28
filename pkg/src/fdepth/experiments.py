"""Replicated misclassification studies on simulated or user-supplied curves."""

from __future__ import annotations

import configparser
import csv
import functools
import io
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .classify import ClassifierSpec, Method, predict
from .core import (
    DEFAULT_HMD_PERCENTILE,
    DEFAULT_NUM_PROJECTIONS,
    DEPTH_ORDER,
    ConfigError,
    DepthKind,
    DepthSpec,
    FunctionalSample,
    LabeledSample,
    derive_seed,
)
from .datasets import SplitKind, SplitScheme, load_curves_csv, regrid_labeled, split_t1, split_t2
from .depths import compute_depth
from .modelselect import DEFAULT_PERCENTILES, PercentileChoice, cv_select_percentile, make_cv_plan
from .simulate import CgpSpec, generate_cgp

PROCEDURES = (Method.DTM, Method.WAD, Method.WMD)


@dataclass(frozen=True)
class MethodSpec:
    """One table cell: a procedure, its depth, and optionally a fixed percentile.

    A KFSD method without a percentile has it chosen by cross validation on
    every training sample.
    """

    method: Method
    depth: Optional[DepthKind] = None
    percentile: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.depth is not None:
            object.__setattr__(self, "depth", DepthKind(self.depth))
        if (self.method is Method.KNN) != (self.depth is None):
            raise ConfigError("k-NN takes no depth; DTM/WAD/WMD need one")
        if self.percentile is not None and self.depth not in (DepthKind.HMD, DepthKind.KFSD):
            raise ConfigError("a percentile only applies to HMD and KFSD")

    @classmethod
    def parse(cls, text: str) -> "MethodSpec":
        text = text.strip().upper().replace("K-NN", "KNN")
        if text == "KNN":
            return cls(Method.KNN)
        try:
            proc, depth = text.split("+")
            pct = None
            if "@" in depth:
                depth, pct_text = depth.split("@")
                pct = float(pct_text)
            return cls(Method(proc), DepthKind(depth), pct)
        except (ValueError, KeyError):
            raise ConfigError(f"cannot parse method {text!r}") from None

    @property
    def column(self) -> str:
        if self.depth is None:
            return "KNN"
        return self.depth.value + ("" if self.percentile is None else f"@{self.percentile:g}")

    @property
    def name(self) -> str:
        return "KNN" if self.method is Method.KNN else f"{self.method.value}+{self.column}"

    @property
    def needs_cv(self) -> bool:
        return self.depth is DepthKind.KFSD and self.percentile is None


def all_methods() -> Tuple[MethodSpec, ...]:
    """The 21 depth-based methods followed by k-NN."""
    return tuple(MethodSpec(p, d) for p in PROCEDURES for d in DEPTH_ORDER) + (MethodSpec(Method.KNN),)


@dataclass(frozen=True)
class DatasetSource:
    path: str
    scheme: SplitScheme
    regrid: Optional[int] = None
    truncate_to: Optional[int] = None


@dataclass(frozen=True)
class ExperimentConfig:
    source: Union[CgpSpec, DatasetSource]
    methods: Tuple[MethodSpec, ...] = field(default_factory=all_methods)
    replications: int = 125
    train_per_group: Tuple[int, int] = (25, 25)
    percentiles: Tuple[float, ...] = DEFAULT_PERCENTILES
    folds: int = 5
    master_seed: int = 0
    alpha: float = 0.2
    k: int = 5
    num_projections: int = DEFAULT_NUM_PROJECTIONS
    hmd_percentile: float = DEFAULT_HMD_PERCENTILE
    track_best_percentiles: bool = True
    timing: bool = False
    output: Optional[str] = None
    format: str = "markdown"

    def __post_init__(self):
        if not self.methods:
            raise ConfigError("at least one method is required")
        if self.replications < 1:
            raise ConfigError("replications must be at least 1")
        if self.format not in ("csv", "markdown"):
            raise ConfigError(f"unknown table format {self.format!r}")
        if not self.percentiles:
            raise ConfigError("empty percentile grid")
        names = [m.name for m in self.methods]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate methods")

    @property
    def is_t2(self) -> bool:
        return isinstance(self.source, DatasetSource) and self.source.scheme.kind is SplitKind.T2


@dataclass
class ReplicationResult:
    r: int
    wrong: Dict[str, int]
    tested: int
    ties: Dict[str, int]
    choices: Dict[str, PercentileChoice] = field(default_factory=dict)
    # test errors of each KFSD method at every fixed candidate percentile
    percentile_errors: Dict[str, Dict[float, int]] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)

    def rate(self, name: str) -> float:
        return self.wrong[name] / self.tested

    def best_percentiles(self, name: str) -> List[float]:
        errs = self.percentile_errors.get(name)
        if not errs:
            return []
        low = min(errs.values())
        return [p for p, e in errs.items() if e == low]

    def cv_required(self, name: str) -> Optional[bool]:
        """True when the fixed percentiles disagree on the test error, so the
        choice among them matters."""
        errs = self.percentile_errors.get(name)
        return None if not errs else len(set(errs.values())) >= 2


@functools.lru_cache(maxsize=8)
def _load_dataset(path: str, regrid: Optional[int], truncate_to: Optional[int]) -> LabeledSample:
    table = load_curves_csv(path)
    if truncate_to is not None:
        table = table.truncate(truncate_to)
    if regrid is not None:
        return regrid_labeled(table, regrid)
    return table.to_labeled()


def replication_count(cfg: ExperimentConfig) -> int:
    if cfg.is_t2:
        src = cfg.source
        return _load_dataset(src.path, src.regrid, src.truncate_to).n
    return cfg.replications


def replication_data(cfg: ExperimentConfig, r: int) -> Tuple[LabeledSample, LabeledSample]:
    """Training and test samples of replication ``r``."""
    src = cfg.source
    if isinstance(src, CgpSpec):
        data = generate_cgp(replace(src, seed=derive_seed(cfg.master_seed, r, 0)))
        t0, t1 = cfg.train_per_group
        idx0, idx1 = data.indices(0), data.indices(1)
        if t0 >= idx0.size or t1 >= idx1.size:
            raise ConfigError("training sizes must leave test curves in both groups")
        train = np.concatenate([idx0[:t0], idx1[:t1]])
        test = np.concatenate([idx0[t0:], idx1[t1:]])
        return data.subset(train), data.subset(test)
    data = _load_dataset(src.path, src.regrid, src.truncate_to)
    if src.scheme.kind is SplitKind.T2:
        return split_t2(data, r)
    return split_t1(data, replace(src.scheme, seed=cfg.master_seed), r)


def _depth_spec(cfg: ExperimentConfig, m: MethodSpec, proj_seed: int, percentile: Optional[float] = None) -> DepthSpec:
    kind = m.depth
    if kind is DepthKind.KFSD:
        return DepthSpec(kind, bandwidth_percentile=percentile if percentile is not None else m.percentile)
    if kind is DepthKind.HMD:
        return DepthSpec(kind, bandwidth_percentile=m.percentile or cfg.hmd_percentile)
    if kind in (DepthKind.RTD, DepthKind.IDD):
        return DepthSpec(kind, num_projections=cfg.num_projections, projection_seed=proj_seed)
    if kind is DepthKind.MBD:
        return DepthSpec(kind, band_order=2)
    return DepthSpec(kind)


def classifier_for(cfg: ExperimentConfig, m: MethodSpec, proj_seed: int, tie_seed: int,
                   percentile: Optional[float] = None) -> ClassifierSpec:
    if m.method is Method.KNN:
        return ClassifierSpec(Method.KNN, k=cfg.k, tie_seed=tie_seed)
    depth = _depth_spec(cfg, m, proj_seed, percentile)
    alpha = cfg.alpha if m.method is Method.DTM else None
    return ClassifierSpec(m.method, depth, alpha=alpha, tie_seed=tie_seed)


def _count_errors(train, test, spec) -> Tuple[int, int]:
    preds = predict(train, test.values, spec)
    labels = np.array([p.label for p in preds])
    return int(np.sum(labels != test.labels)), sum(p.tie_broken for p in preds)


def run_replication(cfg: ExperimentConfig, r: int) -> ReplicationResult:
    """Generate or split the data of replication ``r`` and score every method."""
    train, test = replication_data(cfg, r)
    proj_seed = derive_seed(cfg.master_seed, r, 1)
    tie_seed = derive_seed(cfg.master_seed, r, 2)
    cv_seed = derive_seed(cfg.master_seed, r, 3)
    result = ReplicationResult(r, {}, test.n, {})
    plan = None
    for m in cfg.methods:
        pct = None
        if m.needs_cv:
            if plan is None:
                plan = make_cv_plan(train, cfg.folds, cv_seed)
            probe = classifier_for(cfg, m, proj_seed, tie_seed, cfg.percentiles[0])
            choice = cv_select_percentile(train, probe, cfg.percentiles, plan)
            result.choices[m.name] = choice
            pct = choice.percentile
            if cfg.track_best_percentiles:
                result.percentile_errors[m.name] = {
                    p: _count_errors(train, test, classifier_for(cfg, m, proj_seed, tie_seed, p))[0]
                    for p in cfg.percentiles
                }
        spec = classifier_for(cfg, m, proj_seed, tie_seed, pct)
        result.wrong[m.name], result.ties[m.name] = _count_errors(train, test, spec)
    if cfg.timing:
        result.timings = time_within_group_depths(cfg, train, proj_seed)
    return result


def time_within_group_depths(cfg: ExperimentConfig, train: LabeledSample, proj_seed: int) -> Dict[str, float]:
    """Wall-clock seconds to compute the within-group depths of the training curves."""
    out = {}
    kinds = [k for k in DEPTH_ORDER if any(m.depth is k for m in cfg.methods)]
    for kind in kinds:
        spec = _depth_spec(cfg, MethodSpec(Method.WMD, kind), proj_seed, 50.0)
        start = time.perf_counter()
        for g in (0, 1):
            ref = train.group(g)
            compute_depth(ref, ref.values, spec)
        out[kind.value] = time.perf_counter() - start
    return out


def _run_chunk(args):
    cfg, rs = args
    return [run_replication(cfg, r) for r in rs]


def run_experiment(cfg: ExperimentConfig, workers: int = 1, progress=None) -> List[ReplicationResult]:
    """Run every replication; results come back ordered by replication index."""
    count = replication_count(cfg)
    if workers <= 1:
        out = []
        for r in range(count):
            out.append(run_replication(cfg, r))
            if progress is not None:
                progress(r + 1, count)
        return out
    chunks = [list(range(i, count, workers)) for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = [res for part in pool.map(_run_chunk, [(cfg, c) for c in chunks]) for res in part]
    return sorted(results, key=lambda res: res.r)


# --------------------------------------------------------------------------
# local versus global ranking scenario

GLOBAL_VS_LOCAL_SIZES = (10, 10, 1)
GLOBAL_VS_LOCAL_SHIFTS = (0.0, 10.0, 5.0)


@dataclass(frozen=True, eq=False)
class RankingScenario:
    sample: FunctionalSample
    lone: int  # index of the single curve of the third cluster
    depths: Dict[str, np.ndarray]

    def is_deepest(self, name: str) -> bool:
        d = self.depths[name]
        return bool(np.all(d[self.lone] > np.delete(d, self.lone)))

    def is_least_deep(self, name: str) -> bool:
        d = self.depths[name]
        return bool(np.all(d[self.lone] < np.delete(d, self.lone)))


def global_vs_local(seed: int = 0, kfsd_percentile: float = 15.0,
                    num_projections: int = DEFAULT_NUM_PROJECTIONS) -> RankingScenario:
    """Three clusters of CGP1 group-0 curves (10, 10 and 1 curves) shifted by
    0, 10 and 5, with every depth of every curve within the pooled sample."""
    total = sum(GLOBAL_VS_LOCAL_SIZES)
    base = generate_cgp(CgpSpec("CGP1", n0=total, n1=0, seed=derive_seed(seed, 0))).sample
    shifts = np.repeat(GLOBAL_VS_LOCAL_SHIFTS, GLOBAL_VS_LOCAL_SIZES)
    sample = FunctionalSample(base.grid, base.values + shifts[:, None])
    proj_seed = derive_seed(seed, 1)
    depths = {}
    for kind in DEPTH_ORDER:
        if kind is DepthKind.KFSD:
            spec = DepthSpec.default(kind, percentile=kfsd_percentile)
        elif kind in (DepthKind.RTD, DepthKind.IDD):
            spec = DepthSpec(kind, num_projections=num_projections, projection_seed=proj_seed)
        else:
            spec = DepthSpec.default(kind)
        depths[kind.value] = np.asarray(compute_depth(sample, sample.values, spec))
    return RankingScenario(sample, total - 1, depths)


# --------------------------------------------------------------------------
# summaries and tables


@dataclass
class MethodSummary:
    name: str
    rates: np.ndarray
    wrong: int
    tested: int
    ties: int = 0
    cv_required: Optional[float] = None  # share of replications whose fixed-percentile test errors differ
    cv_candidates_differ: Optional[float] = None  # share whose CV errors differ across candidates
    selected_percentiles: Counter = field(default_factory=Counter)
    best_percentiles: Counter = field(default_factory=Counter)

    @property
    def mean_pct(self) -> float:
        return float(100 * self.rates.mean())

    @property
    def sd_pct(self) -> float:
        if self.rates.size < 2:
            return 0.0
        return float(100 * self.rates.std(ddof=1))


@dataclass
class ExperimentSummary:
    methods: Dict[str, MethodSummary]
    counts: bool = False  # leave-one-out studies report misclassified counts
    timings: Dict[str, float] = field(default_factory=dict)

    def __getitem__(self, name: str) -> MethodSummary:
        return self.methods[name]


def summarize(
    errors: Mapping[str, Sequence[float]],
    choices: Optional[Mapping[str, Sequence[PercentileChoice]]] = None,
    *,
    counts: bool = False,
) -> ExperimentSummary:
    """Mean and sample standard deviation (in percent) of per-replication error rates."""
    if not errors:
        raise ValueError("nothing to summarize")
    out = {}
    for name, rates in errors.items():
        rates = np.asarray(rates, dtype=float)
        ms = MethodSummary(name, rates, 0, 0)
        if choices and name in choices:
            picks = choices[name]
            ms.cv_candidates_differ = float(np.mean([c.required_cv for c in picks]))
            ms.selected_percentiles = Counter(c.percentile for c in picks)
        out[name] = ms
    return ExperimentSummary(out, counts)


def summarize_results(results: Sequence[ReplicationResult], cfg: Optional[ExperimentConfig] = None) -> ExperimentSummary:
    if not results:
        raise ValueError("nothing to summarize")
    names = list(results[0].wrong)
    errors = {n: [res.rate(n) for res in results] for n in names}
    choices = {n: [res.choices[n] for res in results] for n in results[0].choices}
    summary = summarize(errors, choices, counts=bool(cfg is not None and cfg.is_t2))
    for n, ms in summary.methods.items():
        ms.wrong = sum(res.wrong[n] for res in results)
        ms.tested = sum(res.tested for res in results)
        ms.ties = sum(res.ties[n] for res in results)
        for res in results:
            ms.best_percentiles.update(res.best_percentiles(n))
        flags = [res.cv_required(n) for res in results]
        if flags and all(f is not None for f in flags):
            ms.cv_required = float(np.mean(flags))
    timings = [res.timings for res in results if res.timings]
    if timings:
        summary.timings = {k: float(np.mean([t[k] for t in timings])) for k in timings[0]}
    return summary


def _layout(summary: ExperimentSummary):
    rows, cols = [], []
    for name in summary.methods:
        if name == "KNN":
            continue
        proc, col = name.split("+", 1)
        if proc not in rows:
            rows.append(proc)
        if col not in cols:
            cols.append(col)
    order = {k.value: i for i, k in enumerate(DEPTH_ORDER)}
    cols.sort(key=lambda c: (order.get(c.split("@")[0], 99), c))
    rows.sort(key=lambda p: [m.value for m in PROCEDURES].index(p))
    return rows, cols


def _cells(summary: ExperimentSummary, name: str):
    ms = summary.methods.get(name)
    if ms is None:
        return None
    if summary.counts:
        return (str(ms.wrong),)
    return (f"{ms.mean_pct:.2f}", f"{ms.sd_pct:.2f}")


def emit_table(summary: ExperimentSummary, format: str = "markdown") -> str:
    """Render the summary with one row per procedure and one column per depth.

    Percentages (mean and standard deviation) or, for leave-one-out studies,
    misclassified counts; k-NN spans every depth column.
    """
    rows, cols = _layout(summary)
    if not cols:
        cols = ["KNN"]
    knn = _cells(summary, "KNN")
    if format == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["method", "statistic", *cols])
        stats = ("count",) if summary.counts else ("mean", "sd")
        for proc in rows:
            cells = [_cells(summary, f"{proc}+{c}") for c in cols]
            for i, stat in enumerate(stats):
                writer.writerow([proc, stat, *("" if c is None else c[i] for c in cells)])
        if knn is not None:
            for i, stat in enumerate(stats):
                writer.writerow(["KNN", stat, *([knn[i]] * len(cols))])
        return out.getvalue()
    if format != "markdown":
        raise ValueError(f"unknown format {format!r}")

    def fmt(c):
        if c is None:
            return ""
        return c[0] if len(c) == 1 else f"{c[0]} ({c[1]})"

    lines = ["| Method/Depth | " + " | ".join(cols) + " |", "|---" * (len(cols) + 1) + "|"]
    for proc in rows:
        lines.append(f"| {proc} | " + " | ".join(fmt(_cells(summary, f"{proc}+{c}")) for c in cols) + " |")
    if knn is not None:
        lines.append("| k-NN | " + " | ".join([fmt(knn)] * len(cols)) + " |")
    return "\n".join(lines) + "\n"


def ordinal(p: float) -> str:
    n = int(p)
    if n != p:
        return f"{p:g}th"
    suffix = "th" if 10 <= n % 100 <= 20 else {1: "st", 2: "nd", 3: "rd"}.get(n % 10, "th")
    return f"{n}{suffix}"


def _top(counter: Counter) -> str:
    if not counter:
        return "-"
    most = max(counter.values())
    return ", ".join(ordinal(p) for p in sorted(p for p, c in counter.items() if c == most))


def _pct(value: Optional[float]) -> str:
    return "-" if value is None else f"{100 * value:.2f}"


def emit_cv_table(summary: ExperimentSummary) -> str:
    """Markdown table of CV-requirement percentages and percentile choices.

    "CV required" counts replications whose test errors differ across the
    fixed percentiles; "CV errors differ" counts those whose fold errors do.
    """
    lines = [
        "| Method | CV required (%) | CV errors differ (%) | Selected percentiles | Best percentiles |",
        "|---|---|---|---|---|",
    ]
    for name, ms in summary.methods.items():
        if ms.cv_candidates_differ is None:
            continue
        lines.append(
            f"| {name} | {_pct(ms.cv_required)} | {_pct(ms.cv_candidates_differ)} "
            f"| {_top(ms.selected_percentiles)} | {_top(ms.best_percentiles)} |"
        )
    return "\n".join(lines) + "\n"


def emit_timing_table(summary: ExperimentSummary) -> str:
    lines = ["| Depth | seconds per training sample |", "|---|---|"]
    lines += [f"| {k} | {v:.4f} |" for k, v in summary.timings.items()]
    return "\n".join(lines) + "\n"


def parse_table_csv(text: str) -> Dict[Tuple[str, str, str], float]:
    """Read :func:`emit_table` CSV output back into {(row, statistic, column): value}."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    out = {}
    for row in reader:
        for col, cell in zip(header[2:], row[2:]):
            if cell:
                out[(row[0], row[1], col)] = float(cell)
    return out


# --------------------------------------------------------------------------
# config files


def _floats(text: str) -> Tuple[float, ...]:
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def _methods(text: str) -> Tuple[MethodSpec, ...]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    out = []
    for item in items:
        low = item.lower()
        if low == "all":
            out.extend(all_methods())
        elif low in ("dtm", "wad", "wmd"):
            out.extend(MethodSpec(Method(low.upper()), d) for d in DEPTH_ORDER)
        else:
            out.append(MethodSpec.parse(item))
    seen, unique = set(), []
    for m in out:
        if m.name not in seen:
            seen.add(m.name)
            unique.append(m)
    return tuple(unique)


def parse_config(text: str, base_dir: Union[str, Path] = ".") -> ExperimentConfig:
    """Parse an INI-style experiment config.

    Sections: ``[experiment]`` (replications, master_seed, methods,
    percentiles, folds, alpha, k, num_projections, hmd_percentile, format,
    output, timing) and exactly one of ``[simulation]`` (model, contaminated,
    q, n0, n1, train0, train1, grid_points) or ``[dataset]`` (path, scheme,
    train0, train1, regrid, truncate_to).
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    if "experiment" not in cp:
        raise ConfigError("missing [experiment] section")
    if ("simulation" in cp) == ("dataset" in cp):
        raise ConfigError("exactly one of [simulation] or [dataset] is required")
    ex = cp["experiment"]
    try:
        kwargs = dict(
            replications=ex.getint("replications", 125),
            master_seed=ex.getint("master_seed", 0),
            methods=_methods(ex.get("methods", "all")),
            percentiles=_floats(ex.get("percentiles", ",".join(str(p) for p in DEFAULT_PERCENTILES))),
            folds=ex.getint("folds", 5),
            alpha=ex.getfloat("alpha", 0.2),
            k=ex.getint("k", 5),
            num_projections=ex.getint("num_projections", DEFAULT_NUM_PROJECTIONS),
            hmd_percentile=ex.getfloat("hmd_percentile", DEFAULT_HMD_PERCENTILE),
            timing=ex.getboolean("timing", False),
            track_best_percentiles=ex.getboolean("track_best_percentiles", True),
            format=ex.get("format", "markdown"),
            output=ex.get("output", None),
        )
        if "simulation" in cp:
            sim = cp["simulation"]
            spec = CgpSpec(
                model=sim.get("model", "CGP1").upper(),
                contaminated=sim.getboolean("contaminated", False),
                q=sim.getfloat("q", 0.10),
                n0=sim.getint("n0", 50),
                n1=sim.getint("n1", 50),
                grid_points=sim.getint("grid_points", 51),
            )
            kwargs["source"] = spec
            kwargs["train_per_group"] = (sim.getint("train0", spec.n0 // 2), sim.getint("train1", spec.n1 // 2))
        else:
            ds = cp["dataset"]
            if "path" not in ds:
                raise ConfigError("[dataset] needs a path")
            path = Path(ds["path"])
            if not path.is_absolute():
                path = Path(base_dir) / path
            kind = SplitKind(ds.get("scheme", "T1").upper())
            if kind is SplitKind.T1:
                scheme = SplitScheme(kind, (ds.getint("train0"), ds.getint("train1")), kwargs["replications"])
            else:
                scheme = SplitScheme(kind)
            regrid = ds.getint("regrid", None)
            truncate = ds.getint("truncate_to", None)
            kwargs["source"] = DatasetSource(str(path), scheme, regrid, truncate)
        return ExperimentConfig(**kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from None


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, path.parent)
