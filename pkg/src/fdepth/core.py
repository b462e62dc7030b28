"""Shared domain types: grids, functional samples, labels and depth specs."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


class FdepthError(Exception):
    """Base class for every error raised by this package."""


class GridMismatch(FdepthError):
    pass


class EmptyGroup(FdepthError):
    pass


class NonFiniteValue(FdepthError):
    pass


class DegenerateBandwidth(FdepthError):
    pass


class InsufficientSample(FdepthError):
    pass


class ZeroDistance(FdepthError):
    pass


class ZeroWeights(FdepthError):
    pass


class FactorizationFailure(FdepthError):
    pass


class ParseError(FdepthError):
    pass


class DomainNotIncreasing(FdepthError):
    pass


class InsufficientPoints(FdepthError):
    pass


class IndexOutOfRange(FdepthError):
    pass


class ConfigError(FdepthError):
    pass


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def derive_seed(*keys: int) -> int:
    """Derive an independent 63-bit seed from a tuple of integer keys."""
    state = np.random.SeedSequence([int(k) for k in keys]).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))


@dataclass(frozen=True, eq=False)
class Grid:
    """Ordered evaluation points shared by every curve of a sample."""

    points: np.ndarray

    def __post_init__(self):
        pts = _frozen(self.points)
        if pts.ndim != 1 or pts.size < 2:
            raise GridMismatch("a grid needs at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise NonFiniteValue("grid points must be finite")
        if not np.all(np.diff(pts) > 0):
            raise DomainNotIncreasing("grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def linspace(cls, start: float, stop: float, num: int) -> "Grid":
        return cls(np.linspace(start, stop, num))

    def __len__(self) -> int:
        return self.points.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return self.points.shape == other.points.shape and bool(np.array_equal(self.points, other.points))

    def __hash__(self) -> int:
        return hash(self.points.tobytes())

    @property
    def span(self) -> float:
        return float(self.points[-1] - self.points[0])

    @property
    def is_equidistant(self) -> bool:
        steps = np.diff(self.points)
        return bool(np.all(np.abs(steps - steps.mean()) <= 1e-9 * abs(steps.mean())))

    @property
    def weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights, so that ``sum(w * f)`` integrates ``f``."""
        w = getattr(self, "_weights", None)
        if w is None:
            steps = np.diff(self.points)
            w = np.zeros_like(self.points)
            w[:-1] += steps / 2
            w[1:] += steps / 2
            w.setflags(write=False)
            object.__setattr__(self, "_weights", w)
        return w


def as_curve(values, grid: Grid) -> np.ndarray:
    """Validate one curve against ``grid`` and return it as a float array."""
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.size != len(grid):
        raise GridMismatch(f"curve of shape {x.shape} does not match grid of {len(grid)} points")
    if not np.all(np.isfinite(x)):
        raise NonFiniteValue("curve contains non-finite values")
    return x


def as_curves(values, grid: Grid) -> np.ndarray:
    """Validate one curve or a stack of curves; always returns a 2-D array."""
    x = np.asarray(values, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != len(grid):
        raise GridMismatch(f"curves of shape {x.shape} do not match grid of {len(grid)} points")
    if not np.all(np.isfinite(x)):
        raise NonFiniteValue("curves contain non-finite values")
    return x


@dataclass(frozen=True, eq=False)
class FunctionalSample:
    """A set of ``n`` curves evaluated on a shared grid; ``values`` has shape (n, m)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[None, :]
        if vals.ndim != 2 or vals.shape[1] != len(self.grid):
            raise GridMismatch(f"curves of shape {vals.shape} do not match grid of {len(self.grid)} points")
        if vals.shape[0] < 1:
            raise InsufficientSample("a functional sample needs at least one curve")
        if not np.all(np.isfinite(vals)):
            raise NonFiniteValue("sample contains non-finite values")
        object.__setattr__(self, "values", _frozen(vals))

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def curve(self, i: int) -> np.ndarray:
        return self.values[i]

    def subset(self, idx) -> "FunctionalSample":
        return FunctionalSample(self.grid, self.values[np.asarray(idx)])

    def map(self, scale: float = 1.0, shift=0.0) -> "FunctionalSample":
        """Return ``scale * curves + shift`` (shift may be a curve)."""
        return FunctionalSample(self.grid, scale * self.values + np.asarray(shift, dtype=float))


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """A functional sample whose curves carry binary group labels."""

    sample: FunctionalSample
    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.size != self.sample.n:
            raise GridMismatch(f"{labels.size} labels for {self.sample.n} curves")
        if labels.size and not np.all(np.isin(labels, (0, 1))):
            raise ValueError("labels must be 0 or 1")
        labels = labels.astype(int)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_arrays(cls, values, labels, grid: Grid) -> "LabeledSample":
        return cls(FunctionalSample(grid, values), labels)

    @property
    def grid(self) -> Grid:
        return self.sample.grid

    @property
    def values(self) -> np.ndarray:
        return self.sample.values

    def __len__(self) -> int:
        return self.sample.n

    @property
    def n(self) -> int:
        return self.sample.n

    def count(self, label: int) -> int:
        return int(np.sum(self.labels == label))

    def indices(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    def group(self, label: int) -> FunctionalSample:
        idx = self.indices(label)
        if idx.size == 0:
            raise EmptyGroup(f"no curves with label {label}")
        return self.sample.subset(idx)

    def subset(self, idx) -> "LabeledSample":
        idx = np.asarray(idx, dtype=int)
        return LabeledSample(self.sample.subset(idx), self.labels[idx])

    def map(self, scale: float = 1.0, shift=0.0) -> "LabeledSample":
        return LabeledSample(self.sample.map(scale, shift), self.labels)

    def relabel(self) -> "LabeledSample":
        """Swap labels 0 and 1."""
        return LabeledSample(self.sample, 1 - self.labels)


def validate_labeled_sample(s: LabeledSample) -> None:
    """Raise unless ``s`` is a usable two-group training sample."""
    grid = s.sample.grid
    if s.sample.values.shape[1] != len(grid) or s.labels.size != s.sample.n:
        raise GridMismatch("curve or label count does not match")
    if not np.all(np.isfinite(s.sample.values)):
        raise NonFiniteValue("sample contains non-finite values")
    for label in (0, 1):
        if s.count(label) == 0:
            raise EmptyGroup(f"no curves with label {label}")


def make_labeled_sample(values: Sequence[Sequence[float]], labels: Sequence[int], grid) -> LabeledSample:
    """Build and validate a labeled sample from plain Python sequences."""
    if not isinstance(grid, Grid):
        grid = Grid(grid)
    rows = [np.asarray(v, dtype=float) for v in values]
    for i, row in enumerate(rows):
        if row.shape != (len(grid),):
            raise GridMismatch(f"curve {i} has {row.size} values, grid has {len(grid)} points")
    s = LabeledSample(FunctionalSample(grid, np.vstack(rows)), np.asarray(labels))
    validate_labeled_sample(s)
    return s


class DepthKind(str, enum.Enum):
    FMD = "FMD"
    HMD = "HMD"
    RTD = "RTD"
    IDD = "IDD"
    MBD = "MBD"
    FSD = "FSD"
    KFSD = "KFSD"


DEPTH_ORDER = tuple(DepthKind)

DEFAULT_HMD_PERCENTILE = 15.0
DEFAULT_NUM_PROJECTIONS = 50


@dataclass(frozen=True)
class DepthSpec:
    """A depth together with its hyperparameters.

    ``bandwidth_percentile`` is used by HMD and KFSD, ``num_projections`` and
    ``projection_seed`` by RTD and IDD, ``band_order`` by MBD.
    """

    kind: DepthKind
    bandwidth_percentile: Optional[float] = None
    num_projections: Optional[int] = None
    band_order: Optional[int] = None
    projection_seed: Optional[int] = None

    def __post_init__(self):
        kind = DepthKind(self.kind)
        object.__setattr__(self, "kind", kind)
        uses_bw = kind in (DepthKind.HMD, DepthKind.KFSD)
        uses_proj = kind in (DepthKind.RTD, DepthKind.IDD)
        if uses_bw != (self.bandwidth_percentile is not None):
            raise ValueError(f"bandwidth_percentile is required exactly for HMD and KFSD (got {kind.value})")
        if uses_bw and not 0 < self.bandwidth_percentile < 100:
            raise ValueError("bandwidth_percentile must lie in (0, 100)")
        if uses_proj != (self.num_projections is not None):
            raise ValueError(f"num_projections is required exactly for RTD and IDD (got {kind.value})")
        if uses_proj and self.num_projections < 1:
            raise ValueError("num_projections must be positive")
        if not uses_proj and self.projection_seed is not None:
            raise ValueError("projection_seed only applies to RTD and IDD")
        if (kind is DepthKind.MBD) != (self.band_order is not None):
            raise ValueError("band_order is required exactly for MBD")
        if self.band_order is not None and self.band_order != 2:
            raise ValueError("only band_order=2 is supported")

    @classmethod
    def default(cls, kind, *, percentile: Optional[float] = None, seed: Optional[int] = None) -> "DepthSpec":
        """Default hyperparameters for ``kind``.

        KFSD has no default percentile; pass ``percentile`` explicitly (or
        select one by cross validation).
        """
        kind = DepthKind(kind)
        if kind is DepthKind.HMD:
            return cls(kind, bandwidth_percentile=DEFAULT_HMD_PERCENTILE if percentile is None else percentile)
        if kind is DepthKind.KFSD:
            if percentile is None:
                raise ValueError("KFSD needs a bandwidth percentile")
            return cls(kind, bandwidth_percentile=percentile)
        if kind in (DepthKind.RTD, DepthKind.IDD):
            return cls(kind, num_projections=DEFAULT_NUM_PROJECTIONS, projection_seed=0 if seed is None else seed)
        if kind is DepthKind.MBD:
            return cls(kind, band_order=2)
        return cls(kind)

    def with_percentile(self, percentile: float) -> "DepthSpec":
        return DepthSpec(self.kind, bandwidth_percentile=percentile, num_projections=self.num_projections,
                         band_order=self.band_order, projection_seed=self.projection_seed)

    def with_seed(self, seed: int) -> "DepthSpec":
        if self.kind not in (DepthKind.RTD, DepthKind.IDD):
            return self
        return DepthSpec(self.kind, num_projections=self.num_projections, projection_seed=seed)

    @property
    def name(self) -> str:
        return self.kind.value
