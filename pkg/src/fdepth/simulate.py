"""Seeded curve-generating processes CGP1-CGP4 and their contaminated variants."""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from .core import FactorizationFailure, FunctionalSample, Grid, LabeledSample

JITTER = 1e-10
JITTER_ESCALATIONS = 3


class CovForm(str, enum.Enum):
    SQ_EXP = "sq_exp"
    ABS_EXP = "abs_exp"


@dataclass(frozen=True)
class CovarianceKernel:
    """Stationary covariance: amplitude * exp(-((t-s)/ell)^2) or amplitude * exp(-|t-s|/ell)."""

    form: CovForm
    amplitude: float
    length_scale_or_rate: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "form", CovForm(self.form))
        if not self.amplitude > 0:
            raise ValueError("covariance amplitude must be positive")
        if not self.length_scale_or_rate > 0:
            raise ValueError("length scale must be positive")

    def matrix(self, points: np.ndarray) -> np.ndarray:
        lag = np.abs(points[:, None] - points[None, :]) / self.length_scale_or_rate
        if self.form is CovForm.SQ_EXP:
            return self.amplitude * np.exp(-(lag**2))
        return self.amplitude * np.exp(-lag)


CGP1_COV = CovarianceKernel(CovForm.SQ_EXP, 0.25, 1.0)
CGP3_COV = CovarianceKernel(CovForm.ABS_EXP, 0.30, 0.3)
CGP4_COV = CovarianceKernel(CovForm.SQ_EXP, 0.00025, 1.0)


@functools.lru_cache(maxsize=32)
def _cholesky(points: bytes, cov: CovarianceKernel) -> np.ndarray:
    t = np.frombuffer(points, dtype=float)
    K = cov.matrix(t)
    eye = np.eye(t.size)
    for k in range(JITTER_ESCALATIONS + 1):
        try:
            L = np.linalg.cholesky(K + JITTER * 100**k * cov.amplitude * eye)
        except np.linalg.LinAlgError:
            continue
        L.setflags(write=False)
        return L
    raise FactorizationFailure(f"covariance matrix not factorizable after {JITTER_ESCALATIONS} jitter escalations")


def gp_factor(grid: Grid, cov: CovarianceKernel) -> np.ndarray:
    """Lower-triangular factor of the (jittered) covariance matrix on ``grid``."""
    return _cholesky(grid.points.tobytes(), cov)


def sample_gaussian_process(grid: Grid, cov: CovarianceKernel, rng: np.random.Generator, size: int | None = None):
    """Zero-mean Gaussian process draw(s) on ``grid``.

    Returns one curve if ``size`` is None, else an array of ``size`` curves.
    """
    L = gp_factor(grid, cov)
    z = rng.standard_normal((1 if size is None else size, len(grid)))
    draws = z @ L.T
    return draws[0] if size is None else draws


class Model(str, enum.Enum):
    CGP1 = "CGP1"
    CGP2 = "CGP2"
    CGP3 = "CGP3"
    CGP4 = "CGP4"


@dataclass(frozen=True)
class CgpSpec:
    model: Model
    n0: int = 50
    n1: int = 50
    contaminated: bool = False
    q: float = 0.10
    grid_points: int = 51
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        if self.contaminated and self.model not in (Model.CGP1, Model.CGP2):
            raise ValueError("contamination is only defined for CGP1 and CGP2")
        if not 0 <= self.q <= 1:
            raise ValueError("contamination probability must lie in [0, 1]")
        if self.n0 < 0 or self.n1 < 0 or self.n0 + self.n1 < 1:
            raise ValueError("group sizes must be nonnegative and not both zero")
        if self.grid_points < 2:
            raise ValueError("need at least two grid points")

    @property
    def grid(self) -> Grid:
        stop = 1.0 if self.model in (Model.CGP1, Model.CGP3) else 2 * math.pi
        return Grid.linspace(0.0, stop, self.grid_points)

    @property
    def name(self) -> str:
        return self.model.value + ("_out" if self.contaminated else "")


# substream ids; each (group, stream) pair gets its own generator
_GAUSSIAN, _UNIFORM, _CONTAM, _EXTRA_GAUSSIAN = range(4)


def _stream(seed: int, group: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), group, stream]))


@dataclass(frozen=True, eq=False)
class GeneratedSample:
    data: LabeledSample
    contaminated: np.ndarray  # bool flag per curve


def _linear_group(spec: CgpSpec, group: int, size: int, cov: CovarianceKernel):
    t = spec.grid.points
    noise = sample_gaussian_process(spec.grid, cov, _stream(spec.seed, group, _GAUSSIAN), size)
    flags = np.zeros(size, dtype=bool)
    if group == 1:
        return 8 * t - 2 + noise, flags
    if spec.contaminated:
        flags = _stream(spec.seed, group, _CONTAM).random(size) < spec.q
    mean = np.where(flags[:, None], 4 * np.sqrt(t), 4 * t)
    return mean + noise, flags


def _trig_group(spec: CgpSpec, group: int, size: int):
    t = spec.grid.points
    rng = _stream(spec.seed, group, _UNIFORM)
    lo, hi = (0.05, 0.1) if group == 0 else (0.1, 0.12)
    u = rng.uniform(lo, hi, size=(size, 2))
    # drawn unconditionally so contamination does not shift the other coefficients
    u_out = rng.uniform(0.1, 0.12, size=size)
    flags = np.zeros(size, dtype=bool)
    if group == 0 and spec.contaminated:
        flags = _stream(spec.seed, group, _CONTAM).random(size) < spec.q
    cos_coef = np.where(flags, u_out, u[:, 1])
    curves = u[:, :1] * np.sin(t) + cos_coef[:, None] * np.cos(t)
    if spec.model is Model.CGP4:
        curves = curves + sample_gaussian_process(spec.grid, CGP4_COV, _stream(spec.seed, group, _EXTRA_GAUSSIAN), size)
    return curves, flags


def generate_cgp_detailed(spec: CgpSpec) -> GeneratedSample:
    """Like :func:`generate_cgp` but also reports which curves were contaminated."""
    parts, flags = [], []
    for group, size in ((0, spec.n0), (1, spec.n1)):
        if spec.model is Model.CGP1:
            curves, f = _linear_group(spec, group, size, CGP1_COV)
        elif spec.model is Model.CGP3:
            curves, f = _linear_group(spec, group, size, CGP3_COV)
        else:
            curves, f = _trig_group(spec, group, size)
        parts.append(curves.reshape(size, len(spec.grid)))
        flags.append(f)
    labels = np.repeat([0, 1], [spec.n0, spec.n1])
    data = LabeledSample(FunctionalSample(spec.grid, np.vstack(parts)), labels)
    return GeneratedSample(data, np.concatenate(flags))


def generate_cgp(spec: CgpSpec) -> LabeledSample:
    """Draw ``n0`` group-0 curves followed by ``n1`` group-1 curves from ``spec.model``."""
    return generate_cgp_detailed(spec).data
