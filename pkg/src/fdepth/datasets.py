"""Curve tables from CSV, natural-spline re-gridding and T1/T2 train/test splits.

CSV layout: a header ``label,<t_1>,...,<t_m>`` followed by one row per curve,
``<0|1|->,<v_1>,...,<v_m>``.  A ``-`` label marks an unlabeled curve.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from .core import (
    DomainNotIncreasing,
    FunctionalSample,
    Grid,
    IndexOutOfRange,
    InsufficientPoints,
    InsufficientSample,
    LabeledSample,
    ParseError,
    derive_seed,
)

UNLABELED = -1


@dataclass(frozen=True, eq=False)
class RawCurveTable:
    domain_points: np.ndarray
    rows: np.ndarray
    labels: np.ndarray  # UNLABELED where the file had "-"

    @property
    def is_labeled(self) -> bool:
        return bool(np.all(self.labels != UNLABELED))

    def truncate(self, m: int) -> "RawCurveTable":
        """Keep the first ``m`` domain points."""
        return RawCurveTable(self.domain_points[:m], self.rows[:, :m], self.labels)

    def to_sample(self) -> FunctionalSample:
        return FunctionalSample(Grid(self.domain_points), self.rows)

    def to_labeled(self) -> LabeledSample:
        if not self.is_labeled:
            raise ParseError("table contains unlabeled curves")
        return LabeledSample(self.to_sample(), self.labels)


def _number(cell: str, where: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ParseError(f"{where}: non-numeric cell {cell!r}") from None
    if not np.isfinite(value):
        raise ParseError(f"{where}: non-finite cell {cell!r}")
    return value


def parse_curves_csv(text: str, source: str = "<string>") -> RawCurveTable:
    reader = csv.reader(io.StringIO(text, newline=""))
    rows = [r for r in reader if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(f"{source}: empty file")
    header = [c.strip() for c in rows[0]]
    if header[0].lstrip("﻿").lower() != "label":
        raise ParseError(f"{source}: header must start with 'label'")
    domain = np.array([_number(c, f"{source} header") for c in header[1:]])
    if domain.size < 2:
        raise ParseError(f"{source}: need at least two domain points")
    if not np.all(np.diff(domain) > 0):
        raise DomainNotIncreasing(f"{source}: domain values are not strictly increasing")
    values, labels = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != domain.size + 1:
            raise ParseError(f"{source} row {lineno}: expected {domain.size + 1} cells, got {len(row)}")
        tag = row[0].strip()
        if tag == "-":
            labels.append(UNLABELED)
        elif tag in ("0", "1"):
            labels.append(int(tag))
        else:
            raise ParseError(f"{source} row {lineno}: bad label {tag!r}")
        values.append([_number(c.strip(), f"{source} row {lineno}") for c in row[1:]])
    if not values:
        raise ParseError(f"{source}: no curves")
    return RawCurveTable(domain, np.array(values, dtype=float), np.array(labels, dtype=int))


def load_curves_csv(path) -> RawCurveTable:
    path = Path(path)
    return parse_curves_csv(path.read_text(encoding="utf-8"), str(path))


def _fmt(v: float) -> str:
    return repr(float(v))


def format_curves_csv(grid_points, values, labels=None) -> str:
    values = np.atleast_2d(values)
    out = io.StringIO()
    out.write("label," + ",".join(_fmt(t) for t in grid_points) + "\n")
    for i, row in enumerate(values):
        tag = "-" if labels is None or labels[i] == UNLABELED else str(int(labels[i]))
        out.write(tag + "," + ",".join(_fmt(v) for v in row) + "\n")
    return out.getvalue()


def write_curves_csv(path, grid_points, values, labels=None) -> None:
    Path(path).write_text(format_curves_csv(grid_points, values, labels), encoding="utf-8")


def natural_cubic_regrid(table: RawCurveTable, m: int) -> FunctionalSample:
    """Interpolate each curve with a natural cubic spline and evaluate it on
    ``m`` equidistant points spanning the original domain."""
    t = table.domain_points
    if t.size < 4:
        raise InsufficientPoints(f"need at least 4 domain points, got {t.size}")
    if m < 2:
        raise InsufficientPoints("need at least 2 output points")
    new = np.linspace(t[0], t[-1], m)
    spline = CubicSpline(t, table.rows, axis=1, bc_type="natural")
    return FunctionalSample(Grid(new), spline(new))


def regrid_labeled(table: RawCurveTable, m: int) -> LabeledSample:
    if not table.is_labeled:
        raise ParseError("table contains unlabeled curves")
    return LabeledSample(natural_cubic_regrid(table, m), table.labels)


class SplitKind(str, enum.Enum):
    T1 = "T1"
    T2 = "T2"


@dataclass(frozen=True)
class SplitScheme:
    """T1: repeated random splits with fixed training counts per group.
    T2: leave-one-out over every curve."""

    kind: SplitKind
    train_per_group: Optional[Tuple[int, int]] = None
    replications: int = 1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", SplitKind(self.kind))
        if self.kind is SplitKind.T1:
            if self.train_per_group is None or len(self.train_per_group) != 2:
                raise ValueError("T1 needs training counts for both groups")
            if min(self.train_per_group) < 1 or self.replications < 1:
                raise ValueError("T1 training counts and replications must be positive")
        elif self.train_per_group is not None:
            raise ValueError("T2 takes no training counts")


def split_t1(s: LabeledSample, scheme: SplitScheme, r: int) -> Tuple[LabeledSample, LabeledSample]:
    """Random training subset of fixed size per group; the rest is the test sample."""
    if scheme.kind is not SplitKind.T1:
        raise ValueError("split_t1 needs a T1 scheme")
    rng = np.random.default_rng(derive_seed(scheme.seed, r))
    train = []
    for label, size in zip((0, 1), scheme.train_per_group):
        idx = s.indices(label)
        if size >= idx.size:
            raise InsufficientSample(f"group {label} has {idx.size} curves, cannot train on {size} and test on the rest")
        train.append(rng.choice(idx, size=size, replace=False))
    train_idx = np.sort(np.concatenate(train))
    test_idx = np.setdiff1d(np.arange(s.n), train_idx)
    return s.subset(train_idx), s.subset(test_idx)


def split_t2(s: LabeledSample, i: int) -> Tuple[LabeledSample, LabeledSample]:
    """Leave curve ``i`` out."""
    if not 0 <= i < s.n:
        raise IndexOutOfRange(f"curve index {i} outside 0..{s.n - 1}")
    rest = np.delete(np.arange(s.n), i)
    return s.subset(rest), s.subset([i])
