"""L2 geometry of discretized curves: inner products, distances, bandwidths."""

from __future__ import annotations

import numpy as np

from .core import DegenerateBandwidth, FunctionalSample, Grid, GridMismatch, InsufficientSample, as_curve


def _check_pair(f, g, grid: Grid):
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape[-1] != len(grid) or g.shape[-1] != len(grid):
        raise GridMismatch(f"curves with {f.shape[-1]} and {g.shape[-1]} values on a {len(grid)}-point grid")
    return f, g


def l2_inner(f, g, grid: Grid) -> float:
    """Trapezoidal approximation of the integral of ``f * g`` over the grid."""
    f, g = _check_pair(f, g, grid)
    return float(np.sum(grid.weights * f * g, axis=-1))


def l2_norm(f, grid: Grid) -> float:
    return float(np.sqrt(max(l2_inner(f, f, grid), 0.0)))


def l2_distance(f, g, grid: Grid) -> float:
    f, g = _check_pair(f, g, grid)
    d = f - g
    return float(np.sqrt(np.sum(grid.weights * d * d)))


def norms(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Row-wise L2 norms of a stack of curves."""
    values = np.asarray(values, dtype=float)
    return np.sqrt(np.sum(grid.weights * values * values, axis=-1))


def cross_distances(a: np.ndarray, b: np.ndarray, grid: Grid) -> np.ndarray:
    """L2 distances between every row of ``a`` (q, m) and every row of ``b`` (n, m)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != len(grid) or b.shape[1] != len(grid):
        raise GridMismatch("curves do not match the grid")
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.einsum("qnm,m,qnm->qn", diff, grid.weights, diff, optimize=False))


def pairwise_distances(s: FunctionalSample) -> np.ndarray:
    """Symmetric n x n matrix of L2 distances between the curves of ``s``.

    Each entry is computed from the difference of the two curves, so the
    matrix is exactly symmetric with an exactly zero diagonal.
    """
    return cross_distances(s.values, s.values, s.grid)


def upper_distances(d: np.ndarray) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    i, j = np.triu_indices(d.shape[0], k=1)
    return d[i, j]


def percentile_of_distances(values, pct: float) -> float:
    """Percentile of a set of pairwise distances (i < j).

    Uses linear interpolation between order statistics: percentile ``p`` of
    the sorted values v_1..v_m sits at fractional rank 1 + (m - 1) p / 100.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise InsufficientSample("a bandwidth needs at least two curves")
    if not 0 < pct < 100:
        raise ValueError("percentile must lie in (0, 100)")
    sigma = float(np.percentile(values, pct, method="linear"))
    if sigma <= 0:
        raise DegenerateBandwidth("all curves are identical; bandwidth would be zero")
    return sigma


def bandwidth_from_percentile(d: np.ndarray, pct: float) -> float:
    """Percentile of the distances between distinct curves of a distance matrix."""
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("expected a square distance matrix")
    if d.shape[0] < 2:
        raise InsufficientSample("a bandwidth needs at least two curves")
    return percentile_of_distances(upper_distances(d), pct)


def sample_bandwidth(s: FunctionalSample, pct: float) -> float:
    return bandwidth_from_percentile(pairwise_distances(s), pct)


def curve_norm(x, grid: Grid) -> float:
    return l2_norm(as_curve(x, grid), grid)
