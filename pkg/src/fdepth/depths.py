"""Functional depths: spatial (FSD, KFSD), kernel (HMD), pointwise (FMD, MBD)
and random-projection (RTD, IDD) depths.

Every depth takes a reference sample and one query curve (1-D array) or a
stack of queries (2-D array, one curve per row).  A 1-D query returns a
float, a 2-D query an array with one value per row.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DegenerateBandwidth,
    DepthKind,
    DepthSpec,
    FunctionalSample,
    Grid,
    GridMismatch,
    InsufficientSample,
    LabeledSample,
    ZeroDistance,
    as_curves,
)
from .geometry import bandwidth_from_percentile, cross_distances, norms, pairwise_distances

ZERO_TOL = 1e-12
HMD_KAPPA0 = 2.0 / math.sqrt(2.0 * math.pi)


def _queries(s: FunctionalSample, x):
    single = np.ndim(x) == 1
    return as_curves(x, s.grid), single


def _out(values: np.ndarray, single: bool):
    return float(values[0]) if single else values


def _zero_tol(Y: np.ndarray, X: np.ndarray, grid: Grid) -> np.ndarray:
    """Per-query coincidence threshold: ZERO_TOL times the largest norm involved."""
    scale = np.maximum(norms(X, grid), norms(Y, grid).max())
    return ZERO_TOL * scale


# --------------------------------------------------------------------------
# spatial depths


def fsd(s: FunctionalSample, x):
    """Sample functional spatial depth: one minus the norm of the mean spatial sign."""
    X, single = _queries(s, x)
    Y = s.values
    w = s.grid.weights
    diff = X[:, None, :] - Y[None, :, :]
    dist = np.sqrt(np.einsum("qnm,m,qnm->qn", diff, w, diff))
    keep = dist > _zero_tol(Y, X, s.grid)[:, None]
    scale = np.divide(1.0, dist, out=np.zeros_like(dist), where=keep)
    total = np.einsum("qnm,qn->qm", diff, scale)
    mean_norm = np.sqrt(np.einsum("qm,m,qm->q", total, w, total)) / s.n
    return _out(np.clip(1.0 - mean_norm, 0.0, 1.0), single)


def fsd_inner_product_oracle(s: FunctionalSample, x) -> float:
    """FSD evaluated purely through inner products of the raw curves.

    Independent route used to cross-check :func:`fsd`; refuses queries that
    coincide with a sample curve.
    """
    X, single = _queries(s, x)
    if not single:
        return np.array([fsd_inner_product_oracle(s, row) for row in X])
    xv = X[0]
    w = s.grid.weights
    Y = s.values
    n = s.n
    xx = float(np.sum(w * xv * xv))
    xy = [float(np.sum(w * xv * Y[i])) for i in range(n)]
    yy = [[float(np.sum(w * Y[i] * Y[j])) for j in range(n)] for i in range(n)]
    d = [math.sqrt(max(xx + yy[i][i] - 2 * xy[i], 0.0)) for i in range(n)]
    tol = _zero_tol(Y, X, s.grid)[0]
    if min(d) <= tol:
        raise ZeroDistance("query coincides with a sample curve")
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += (xx + yy[i][j] - xy[i] - xy[j]) / (d[i] * d[j])
    return 1.0 - math.sqrt(max(total, 0.0)) / n


def gaussian_kernel_kfsd(x, y, grid: Grid, sigma: float) -> float:
    """exp(-||x - y||^2 / sigma^2)."""
    if not sigma > 0:
        raise DegenerateBandwidth(f"sigma must be positive, got {sigma}")
    d = cross_distances(np.atleast_2d(x), np.atleast_2d(y), grid)[0, 0]
    return float(np.exp(-((d / sigma) ** 2)))


def kfsd_from_distances(d_xy: np.ndarray, d_yy: np.ndarray, sigma: float, tol) -> np.ndarray:
    """KFSD of q queries given their distances (q, n) to the sample and the
    sample's own distance matrix (n, n).

    With the Gaussian kernel kappa(x, x) = 1, so writing a = 1 - kappa each
    term of the double sum becomes (a_xy + a_xz - a_yz) / (2 sqrt(a_xy a_xz));
    ``expm1`` keeps a accurate when sigma is much larger than the distances.
    """
    if not sigma > 0:
        raise DegenerateBandwidth(f"sigma must be positive, got {sigma}")
    d_xy = np.atleast_2d(d_xy)
    n = d_yy.shape[0]
    a_xy = -np.expm1(-((d_xy / sigma) ** 2))
    a_yy = -np.expm1(-((d_yy / sigma) ** 2))
    keep = d_xy > np.reshape(tol, (-1, 1))
    a_xy = np.where(keep, a_xy, 0.0)
    root = np.sqrt(a_xy)
    inv = np.divide(1.0, root, out=np.zeros_like(root), where=keep & (root > 0))
    # sum_{i,j} (a_i + a_j) / (2 r_i r_j) over kept pairs, split into its two halves
    half = np.einsum("qi,qi,qj->q", a_xy, inv, inv)
    cross = np.einsum("qi,ij,qj->q", inv, a_yy, inv)
    total = half - 0.5 * cross
    depth = 1.0 - np.sqrt(np.maximum(total, 0.0)) / n
    return np.minimum(depth, 1.0)


def kfsd(s: FunctionalSample, x, sigma: float, *, sample_distances: np.ndarray | None = None):
    """Sample kernelized functional spatial depth with a Gaussian kernel.

    Sample curves coinciding with the query are left out of the double sum;
    the divisor stays the full sample size.
    """
    if not sigma > 0:
        raise DegenerateBandwidth(f"sigma must be positive, got {sigma}")
    X, single = _queries(s, x)
    d_yy = pairwise_distances(s) if sample_distances is None else sample_distances
    d_xy = cross_distances(X, s.values, s.grid)
    return _out(kfsd_from_distances(d_xy, d_yy, sigma, _zero_tol(s.values, X, s.grid)), single)


def hmd(s: FunctionalSample, x, sigma: float, normalized: bool = False):
    """h-modal depth: sum of Gaussian kernel similarities to the sample.

    The normalized version divides by n * kappa(0) and lies in (0, 1].
    """
    if not sigma > 0:
        raise DegenerateBandwidth(f"sigma must be positive, got {sigma}")
    X, single = _queries(s, x)
    d = cross_distances(X, s.values, s.grid)
    raw = HMD_KAPPA0 * np.exp(-(d**2) / (2 * sigma**2)).sum(axis=1)
    return _out(raw / (s.n * HMD_KAPPA0) if normalized else raw, single)


# --------------------------------------------------------------------------
# pointwise depths


def fmd(s: FunctionalSample, x):
    """Fraiman-Muniz depth: integrated univariate depth 1 - |1/2 - F_t(x(t))|,
    averaged over the domain."""
    X, single = _queries(s, x)
    F = (s.values[None, :, :] <= X[:, None, :]).sum(axis=1) / s.n
    D = 1.0 - np.abs(0.5 - F)
    grid = s.grid
    return _out(D @ grid.weights / grid.span, single)


def _covering_pairs(below: np.ndarray, above: np.ndarray, n: int) -> np.ndarray:
    # a closed band [min, max] misses v only if both ends are strictly below or strictly above
    return (n * (n - 1) - below * (below - 1) - above * (above - 1)) / 2


def mbd(s: FunctionalSample, x):
    """Modified band depth with bands of two curves, counted on grid points."""
    if s.n < 2:
        raise InsufficientSample("MBD needs at least two sample curves")
    X, single = _queries(s, x)
    Y = s.values[None, :, :]
    below = (Y < X[:, None, :]).sum(axis=1)
    above = (Y > X[:, None, :]).sum(axis=1)
    pairs = s.n * (s.n - 1) / 2
    frac = _covering_pairs(below, above, s.n) / pairs
    return _out(frac.mean(axis=1), single)


# --------------------------------------------------------------------------
# one-dimensional depths and random projections


def halfspace_depth_1d(values, v):
    """Tukey depth on the line: min(#{u <= v}, #{u >= v}) / n."""
    u = np.asarray(values, dtype=float)
    if u.size == 0:
        raise InsufficientSample("empty sample")
    v = np.asarray(v, dtype=float)
    le = (u <= v[..., None]).sum(axis=-1)
    ge = (u >= v[..., None]).sum(axis=-1)
    out = np.minimum(le, ge) / u.size
    return float(out) if out.ndim == 0 else out


def simplicial_depth_1d(values, v):
    """Fraction of sample pairs whose closed interval contains ``v``."""
    u = np.asarray(values, dtype=float)
    n = u.size
    if n < 2:
        raise InsufficientSample("simplicial depth needs at least two values")
    v = np.asarray(v, dtype=float)
    below = (u < v[..., None]).sum(axis=-1)
    above = (u > v[..., None]).sum(axis=-1)
    out = _covering_pairs(below, above, n) / (n * (n - 1) / 2)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class ProjectionSet:
    directions: FunctionalSample
    seed: int

    @property
    def p(self) -> int:
        return self.directions.n

    def project(self, values: np.ndarray) -> np.ndarray:
        """L2 inner products of each curve with each direction, shape (rows, p)."""
        w = self.directions.grid.weights
        return np.einsum("nm,m,pm->np", np.atleast_2d(values), w, self.directions.values)


@functools.lru_cache(maxsize=256)
def _projections_cached(points: bytes, p: int, seed: int) -> ProjectionSet:
    grid = Grid(np.frombuffer(points, dtype=float))
    rng = np.random.default_rng(seed)
    steps = np.diff(grid.points)
    increments = rng.standard_normal((p, steps.size)) * np.sqrt(steps)
    paths = np.zeros((p, len(grid)))
    paths[:, 1:] = np.cumsum(increments, axis=1)
    paths /= norms(paths, grid)[:, None]
    return ProjectionSet(FunctionalSample(grid, paths), seed)


def generate_projections(grid: Grid, p: int, seed: int) -> ProjectionSet:
    """``p`` standard Brownian motion paths on ``grid``, each scaled to unit L2 norm."""
    if p < 1:
        raise ValueError("need at least one projection")
    return _projections_cached(grid.points.tobytes(), int(p), int(seed))


def _check_projections(s: FunctionalSample, proj: ProjectionSet):
    if proj.directions.grid != s.grid:
        raise GridMismatch("projections were generated on a different grid")


def rtd(s: FunctionalSample, x, proj: ProjectionSet):
    """Random Tukey depth: minimum over directions of the 1-D halfspace depth."""
    X, single = _queries(s, x)
    _check_projections(s, proj)
    py = proj.project(s.values)  # (n, p)
    px = proj.project(X)  # (q, p)
    le = (py[None, :, :] <= px[:, None, :]).sum(axis=1)
    ge = (py[None, :, :] >= px[:, None, :]).sum(axis=1)
    depth = (np.minimum(le, ge) / s.n).min(axis=1)
    return _out(depth, single)


def idd(s: FunctionalSample, x, proj: ProjectionSet):
    """Integrated dual depth: mean over directions of the 1-D simplicial depth."""
    if s.n < 2:
        raise InsufficientSample("IDD needs at least two sample curves")
    X, single = _queries(s, x)
    _check_projections(s, proj)
    py = proj.project(s.values)
    px = proj.project(X)
    below = (py[None, :, :] < px[:, None, :]).sum(axis=1)
    above = (py[None, :, :] > px[:, None, :]).sum(axis=1)
    frac = _covering_pairs(below, above, s.n) / (s.n * (s.n - 1) / 2)
    return _out(frac.mean(axis=1), single)


# --------------------------------------------------------------------------
# dispatch


@dataclass(frozen=True, eq=False)
class DepthVector:
    values: np.ndarray
    spec: DepthSpec


def projections_for(spec: DepthSpec, grid: Grid) -> ProjectionSet | None:
    if spec.kind not in (DepthKind.RTD, DepthKind.IDD):
        return None
    seed = 0 if spec.projection_seed is None else spec.projection_seed
    return generate_projections(grid, spec.num_projections, seed)


def compute_depth(
    ref: FunctionalSample,
    queries,
    spec: DepthSpec,
    *,
    normalized_hmd: bool = True,
    ref_distances: np.ndarray | None = None,
    sigma: float | None = None,
) -> np.ndarray:
    """Depth of every query row relative to ``ref`` under ``spec``.

    Bandwidths for HMD and KFSD come from the percentile of ``ref``'s own
    pairwise distances unless ``sigma`` is given.
    """
    X = as_curves(queries, ref.grid)
    kind = spec.kind
    if kind in (DepthKind.HMD, DepthKind.KFSD) and sigma is None:
        d = pairwise_distances(ref) if ref_distances is None else ref_distances
        sigma = bandwidth_from_percentile(d, spec.bandwidth_percentile)
        ref_distances = d
    if kind is DepthKind.FSD:
        return fsd(ref, X)
    if kind is DepthKind.KFSD:
        return kfsd(ref, X, sigma, sample_distances=ref_distances)
    if kind is DepthKind.HMD:
        return hmd(ref, X, sigma, normalized=normalized_hmd)
    if kind is DepthKind.FMD:
        return fmd(ref, X)
    if kind is DepthKind.MBD:
        return mbd(ref, X)
    proj = projections_for(spec, ref.grid)
    if kind is DepthKind.RTD:
        return rtd(ref, X, proj)
    return idd(ref, X, proj)


def depth_vector(s: LabeledSample, group: int, queries, spec: DepthSpec, *, normalized_hmd: bool = True) -> DepthVector:
    """Depth of each query with respect to the curves carrying label ``group``."""
    ref = s.group(group)
    if isinstance(queries, FunctionalSample):
        queries = queries.values
    return DepthVector(compute_depth(ref, queries, spec, normalized_hmd=normalized_hmd), spec)
