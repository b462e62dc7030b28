"""Cross-validated choice of the KFSD bandwidth percentile."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, Sequence

import numpy as np

from .classify import ClassifierSpec, Method, decide, decision_scores, trimmed_mean, wad_distances
from .core import DegenerateBandwidth, DepthKind, DepthSpec, InsufficientSample, LabeledSample
from .depths import compute_depth
from .geometry import cross_distances

DEFAULT_PERCENTILES = (15.0, 25.0, 33.0, 50.0, 66.0, 75.0, 85.0)


@dataclass(frozen=True, eq=False)
class CvPlan:
    folds: int
    fold_assignment: np.ndarray
    seed: int

    def split(self, s: LabeledSample, fold: int):
        """(cv-train, cv-test) pair for ``fold``."""
        test = self.fold_assignment == fold
        return s.subset(np.flatnonzero(~test)), s.subset(np.flatnonzero(test))


def make_cv_plan(s: LabeledSample, folds: int = 5, seed: int = 0) -> CvPlan:
    """Label-stratified folds: each group is shuffled and dealt round-robin."""
    if folds < 2:
        raise ValueError("need at least two folds")
    assignment = np.empty(s.n, dtype=int)
    rng = np.random.default_rng(seed)
    start = 0
    for label in (0, 1):
        idx = s.indices(label)
        if idx.size < folds:
            raise InsufficientSample(f"group {label} has {idx.size} curves for {folds} folds")
        # the second group continues the deal so fold totals differ by at most one
        assignment[rng.permutation(idx)] = (start + np.arange(idx.size)) % folds
        start = (start + idx.size) % folds
    assignment.setflags(write=False)
    return CvPlan(folds, assignment, seed)


class TieLevel(str, enum.Enum):
    PRIMARY = "primary"
    SECONDARY = "secondary"
    RANDOM = "random"


@dataclass(frozen=True)
class PercentileChoice:
    """Outcome of the percentile search.

    ``secondary`` holds the tie-break score of every candidate that tied on
    the CV error; for WMD it is the summed KFSD of each held-out curve within
    its own group, taken as the plain depth value (already at most 1).
    """

    percentile: float
    cv_error: float
    required_cv: bool
    tie_level: TieLevel
    errors: Dict[float, int] = field(default_factory=dict)
    secondary: Dict[float, float] = field(default_factory=dict)
    secondary_interpretation: str = "raw KFSD value"


def _kfsd_spec(method: ClassifierSpec, pct: float) -> ClassifierSpec:
    return method.with_depth(DepthSpec(DepthKind.KFSD, bandwidth_percentile=pct))


def tiebreak_score(method: ClassifierSpec, s_cv_train: LabeledSample, s_cv_test: LabeledSample, percentile: float) -> float:
    """Secondary criterion for one CV fold.

    DTM: summed distance of each held-out curve to its own group's trimmed
    mean (minimize).  WAD: summed depth-weighted average distance to its own
    group (minimize).  WMD: summed KFSD of each held-out curve within its own
    group (maximize).
    """
    depth = DepthSpec(DepthKind.KFSD, bandwidth_percentile=percentile)
    total = 0.0
    for g in (0, 1):
        X = s_cv_test.values[s_cv_test.labels == g]
        if X.shape[0] == 0:
            continue
        if method.method is Method.DTM:
            m = trimmed_mean(s_cv_train, g, depth, method.alpha)
            total += float(cross_distances(X, m[None, :], s_cv_train.grid).sum())
        elif method.method is Method.WAD:
            total += float(wad_distances(s_cv_train, g, depth, X).sum())
        elif method.method is Method.WMD:
            total += float(_own_group_kfsd(s_cv_train.group(g), X, depth).sum())
        else:
            raise ValueError("no secondary criterion for k-NN")
    return total


def _own_group_kfsd(ref, X: np.ndarray, depth: DepthSpec) -> np.ndarray:
    try:
        return compute_depth(ref, X, depth)
    except DegenerateBandwidth:
        # identical group curves: use the zero-bandwidth limit, 1 on the group and 0 elsewhere
        d = cross_distances(X, ref.values[:1], ref.grid)[:, 0]
        return (d <= 1e-12 * max(1.0, float(np.abs(ref.values).max()))).astype(float)


def _maximizes(method: ClassifierSpec) -> bool:
    return method.method is Method.WMD


def cv_select_percentile(
    s: LabeledSample,
    method: ClassifierSpec,
    grid: Sequence[float] = DEFAULT_PERCENTILES,
    plan: CvPlan | None = None,
) -> PercentileChoice:
    """Pick the KFSD bandwidth percentile with the fewest CV misclassifications.

    Ties on the error count go to the method's secondary criterion, remaining
    ties to a uniform draw seeded by the plan.
    """
    if method.method is Method.KNN:
        raise ValueError("k-NN has no bandwidth to select")
    grid = [float(p) for p in grid]
    if not grid:
        raise ValueError("empty percentile grid")
    if plan is None:
        plan = make_cv_plan(s)
    folds = [plan.split(s, f) for f in range(plan.folds)]
    n_test = sum(test.n for _, test in folds)

    errors = {}
    for pct in grid:
        spec = _kfsd_spec(method, pct)
        wrong = 0
        for train, test in folds:
            labels = [p.label for p in decide(decision_scores(train, test.values, spec), spec)]
            wrong += int(np.sum(np.asarray(labels) != test.labels))
        errors[pct] = wrong

    best = min(errors.values())
    tied = [p for p in grid if errors[p] == best]
    required = len(set(errors.values())) >= 2
    if len(tied) == 1:
        return PercentileChoice(tied[0], best / n_test, required, TieLevel.PRIMARY, errors)

    secondary = {p: sum(tiebreak_score(method, train, test, p) for train, test in folds) for p in tied}
    target = max(secondary.values()) if _maximizes(method) else min(secondary.values())
    finalists = [p for p in tied if secondary[p] == target]
    if len(finalists) == 1:
        return PercentileChoice(finalists[0], best / n_test, required, TieLevel.SECONDARY, errors, secondary)
    pick = finalists[int(np.random.default_rng([plan.seed, 1]).integers(len(finalists)))]
    return PercentileChoice(pick, best / n_test, required, TieLevel.RANDOM, errors, secondary)
