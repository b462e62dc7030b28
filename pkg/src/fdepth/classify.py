"""Depth-based two-group classifiers (DTM, WAD, WMD) and functional k-NN."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .core import (
    DepthKind,
    DepthSpec,
    InsufficientSample,
    LabeledSample,
    ZeroWeights,
    as_curves,
    validate_labeled_sample,
)
from .depths import compute_depth
from .geometry import cross_distances

DEFAULT_ALPHA = 0.2
DEFAULT_K = 5


class Method(str, enum.Enum):
    DTM = "DTM"
    WAD = "WAD"
    WMD = "WMD"
    KNN = "KNN"


@dataclass(frozen=True)
class ClassifierSpec:
    """Classification rule plus its depth and tuning constants.

    ``alpha`` (DTM) and ``k`` (KNN) default to 0.2 and 5 when omitted.
    """

    method: Method
    depth: Optional[DepthSpec] = None
    alpha: Optional[float] = None
    k: Optional[int] = None
    tie_seed: int = 0

    def __post_init__(self):
        method = Method(self.method)
        object.__setattr__(self, "method", method)
        if (method is Method.KNN) == (self.depth is not None):
            raise ValueError("a depth is required for DTM/WAD/WMD and not allowed for KNN")
        if method is Method.DTM:
            if self.alpha is None:
                object.__setattr__(self, "alpha", DEFAULT_ALPHA)
            if not 0 <= self.alpha < 1:
                raise ValueError("alpha must lie in [0, 1)")
        elif self.alpha is not None:
            raise ValueError("alpha only applies to DTM")
        if method is Method.KNN:
            if self.k is None:
                object.__setattr__(self, "k", DEFAULT_K)
            if self.k < 1 or self.k % 2 == 0:
                raise ValueError("k must be odd and positive")
        elif self.k is not None:
            raise ValueError("k only applies to KNN")

    @property
    def name(self) -> str:
        return "KNN" if self.method is Method.KNN else f"{self.method.value}+{self.depth.name}"

    @property
    def uses_kfsd(self) -> bool:
        return self.depth is not None and self.depth.kind is DepthKind.KFSD

    def with_depth(self, depth: DepthSpec) -> "ClassifierSpec":
        return ClassifierSpec(self.method, depth, self.alpha, self.k, self.tie_seed)

    def with_tie_seed(self, seed: int) -> "ClassifierSpec":
        return ClassifierSpec(self.method, self.depth, self.alpha, self.k, seed)


@dataclass(frozen=True)
class Prediction:
    label: int
    scores: tuple
    tie_broken: bool = False


def _trim_count(n: int, alpha: float) -> int:
    # round first so that e.g. 0.8 * 25 does not become 21 through representation error
    return max(1, math.ceil(round((1 - alpha) * n, 9)))


def deepest_indices(depths: np.ndarray, m: int) -> np.ndarray:
    """Indices of the ``m`` largest depths; ties broken by lower index."""
    order = np.argsort(-np.asarray(depths), kind="stable")
    return np.sort(order[:m])


def trimmed_mean(s: LabeledSample, group: int, depth: DepthSpec, alpha: float) -> np.ndarray:
    """Pointwise mean of the ceil((1 - alpha) n_g) deepest curves of ``group``."""
    if not 0 <= alpha < 1:
        raise ValueError("alpha must lie in [0, 1)")
    ref = s.group(group)
    if alpha == 0:
        return ref.values.mean(axis=0)
    d = compute_depth(ref, ref.values, depth)
    keep = deepest_indices(d, _trim_count(ref.n, alpha))
    return ref.values[keep].mean(axis=0)


def group_depths(s: LabeledSample, group: int, depth: DepthSpec) -> np.ndarray:
    """Depth of each curve of ``group`` within its own group."""
    ref = s.group(group)
    return compute_depth(ref, ref.values, depth)


def wad_distances(s: LabeledSample, group: int, depth: DepthSpec, X: np.ndarray) -> np.ndarray:
    """Depth-weighted average distance from each row of ``X`` to ``group``."""
    ref = s.group(group)
    weights = compute_depth(ref, ref.values, depth)
    total = weights.sum()
    if not total > 0:
        raise ZeroWeights(f"within-group depths of group {group} are all zero")
    return cross_distances(X, ref.values, s.grid) @ weights / total


def decision_scores(s: LabeledSample, X: np.ndarray, spec: ClassifierSpec) -> np.ndarray:
    """Per-group decision values, shape (q, 2): distances for DTM/WAD, depths
    for WMD, neighbour votes for KNN."""
    validate_labeled_sample(s)
    X = as_curves(X, s.grid)
    method = spec.method
    if method is Method.KNN:
        if s.n < spec.k:
            raise InsufficientSample(f"k={spec.k} exceeds the training size {s.n}")
        d = cross_distances(X, s.values, s.grid)
        nearest = np.argsort(d, axis=1, kind="stable")[:, : spec.k]
        ones = s.labels[nearest].sum(axis=1)
        return np.column_stack([spec.k - ones, ones]).astype(float)
    cols = []
    for g in (0, 1):
        if method is Method.DTM:
            m = trimmed_mean(s, g, spec.depth, spec.alpha)
            cols.append(cross_distances(X, m[None, :], s.grid)[:, 0])
        elif method is Method.WAD:
            cols.append(wad_distances(s, g, spec.depth, X))
        else:
            cols.append(compute_depth(s.group(g), X, spec.depth, normalized_hmd=True))
    return np.column_stack(cols)


def decide(scores: np.ndarray, spec: ClassifierSpec) -> List[Prediction]:
    """Turn decision scores into predictions, breaking exact ties at random."""
    larger_wins = spec.method in (Method.WMD, Method.KNN)
    out = []
    for i, (a, b) in enumerate(np.asarray(scores, dtype=float)):
        if a == b:
            label = int(np.random.default_rng([spec.tie_seed, i]).integers(2))
            out.append(Prediction(label, (float(a), float(b)), True))
            continue
        label = int(b > a) if larger_wins else int(b < a)
        out.append(Prediction(label, (float(a), float(b)), False))
    return out


def predict(s: LabeledSample, queries, spec: ClassifierSpec) -> List[Prediction]:
    """Classify every row of ``queries`` using the training sample ``s``."""
    return decide(decision_scores(s, queries, spec), spec)


def predict_labels(s: LabeledSample, queries, spec: ClassifierSpec) -> np.ndarray:
    return np.array([p.label for p in predict(s, queries, spec)], dtype=int)


def _single(s: LabeledSample, x, spec: ClassifierSpec, method: Method) -> Prediction:
    if spec.method is not method:
        raise ValueError(f"expected a {method.value} spec, got {spec.method.value}")
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a single curve")
    return predict(s, x[None, :], spec)[0]


def dtm_classify(s: LabeledSample, x, spec: ClassifierSpec) -> Prediction:
    """Assign ``x`` to the group with the nearer depth-trimmed mean."""
    return _single(s, x, spec, Method.DTM)


def wad_classify(s: LabeledSample, x, spec: ClassifierSpec) -> Prediction:
    """Assign ``x`` to the group with the smaller depth-weighted average distance."""
    return _single(s, x, spec, Method.WAD)


def wmd_classify(s: LabeledSample, x, spec: ClassifierSpec) -> Prediction:
    """Assign ``x`` to the group in which it is deeper."""
    return _single(s, x, spec, Method.WMD)


def knn_classify(s: LabeledSample, x, spec: ClassifierSpec) -> Prediction:
    """Majority vote among the ``k`` nearest training curves."""
    return _single(s, x, spec, Method.KNN)


def misclassified(s: LabeledSample, test: LabeledSample, spec: ClassifierSpec) -> int:
    return int(np.sum(predict_labels(s, test.values, spec) != test.labels))

