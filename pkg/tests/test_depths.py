import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import constants, random_sample, samples
from fdepth.core import (
    DegenerateBandwidth,
    DepthKind,
    DepthSpec,
    FunctionalSample,
    Grid,
    GridMismatch,
    InsufficientSample,
    LabeledSample,
    ZeroDistance,
)
from fdepth.depths import (
    HMD_KAPPA0,
    compute_depth,
    depth_vector,
    fmd,
    fsd,
    fsd_inner_product_oracle,
    gaussian_kernel_kfsd,
    generate_projections,
    halfspace_depth_1d,
    hmd,
    idd,
    kfsd,
    mbd,
    rtd,
    simplicial_depth_1d,
)
from fdepth.geometry import bandwidth_from_percentile, pairwise_distances


def _dist(a, b, w):
    return math.sqrt(sum(wk * (ak - bk) ** 2 for wk, ak, bk in zip(w, a, b)))


def kfsd_double_loop(s, x, sigma):
    """Term-by-term evaluation of the kernelized double sum."""
    w = s.grid.weights
    kern = lambda a, b: math.exp(-(_dist(a, b, w) ** 2) / sigma**2)
    tol = 1e-12 * max([_dist(x, 0 * x, w)] + [_dist(y, 0 * y, w) for y in s.values])
    others = [y for y in s.values if _dist(x, y, w) > tol]
    total = 0.0
    for y in others:
        for z in others:
            num = kern(x, x) + kern(y, z) - kern(x, y) - kern(x, z)
            den = math.sqrt(kern(x, x) + kern(y, y) - 2 * kern(x, y)) * math.sqrt(kern(x, x) + kern(z, z) - 2 * kern(x, z))
            total += num / den
    return 1 - math.sqrt(max(total, 0.0)) / s.n


# ---------------------------------------------------------------- FSD


def test_fsd_single_curve_equal_to_query(unit_grid):
    s = FunctionalSample(unit_grid, np.sin(unit_grid.points))
    assert fsd(s, np.sin(unit_grid.points)) == 1.0


def test_fsd_symmetric_pair_cancels(unit_grid):
    x = np.cos(3 * unit_grid.points)
    c = unit_grid.points**2 + 0.5
    assert fsd(FunctionalSample(unit_grid, np.vstack([x + c, x - c])), x) == pytest.approx(1.0, abs=1e-12)


def test_fsd_identical_signs(unit_grid):
    assert fsd(constants([0, 0, 0], unit_grid), np.ones(51)) == pytest.approx(0.0, abs=1e-12)


def test_fsd_matches_oracle_on_random_curves(rng):
    for _ in range(10):
        s = random_sample(rng, 5)
        x = random_sample(rng, 1).values[0]
        assert abs(fsd(s, x) - fsd_inner_product_oracle(s, x)) <= 1e-10


def test_oracle_single_direction(unit_grid):
    x = np.sin(unit_grid.points)
    assert fsd_inner_product_oracle(FunctionalSample(unit_grid, x + 1.0), x) == pytest.approx(0.0, abs=1e-12)


def test_oracle_symmetric_pair(unit_grid):
    x = np.sin(unit_grid.points)
    c = np.exp(unit_grid.points)
    s = FunctionalSample(unit_grid, np.vstack([x + c, x - c]))
    assert fsd_inner_product_oracle(s, x) == pytest.approx(1.0, abs=1e-12)


def test_oracle_refuses_coincident_query(unit_grid):
    s = constants([0.0, 1.0], unit_grid)
    with pytest.raises(ZeroDistance):
        fsd_inner_product_oracle(s, np.ones(51))


# ---------------------------------------------------------------- KFSD


def test_gaussian_kernel_values(unit_grid):
    x = np.zeros(51)
    assert gaussian_kernel_kfsd(x, x, unit_grid, 0.7) == 1.0
    assert gaussian_kernel_kfsd(x, 0.7 * np.ones(51), unit_grid, 0.7) == pytest.approx(math.exp(-1), abs=1e-12)
    assert gaussian_kernel_kfsd(x, 2 * np.ones(51), unit_grid, 1.0) == pytest.approx(math.exp(-4), abs=1e-12)
    with pytest.raises(DegenerateBandwidth):
        gaussian_kernel_kfsd(x, x, unit_grid, 0.0)


def test_kfsd_all_sample_curves_equal_query(unit_grid):
    x = np.sin(unit_grid.points)
    assert kfsd(FunctionalSample(unit_grid, np.vstack([x, x, x])), x, 0.5) == 1.0


def test_kfsd_single_other_curve(unit_grid):
    assert kfsd(constants([1.0], unit_grid), np.zeros(51), 0.3) == pytest.approx(0.0, abs=1e-12)


def test_kfsd_large_bandwidth_approaches_fsd(rng):
    s = random_sample(rng, 10)
    sigma = 1e3 * pairwise_distances(s).max()
    X = random_sample(rng, 20).values
    assert np.max(np.abs(kfsd(s, X, sigma) - fsd(s, X))) <= 1e-3


def test_kfsd_matches_double_loop(rng):
    for _ in range(5):
        s = random_sample(rng, 4)
        sigma = bandwidth_from_percentile(pairwise_distances(s), 50)
        for x in [random_sample(rng, 1).values[0], s.values[2]]:
            assert abs(kfsd(s, x, sigma) - kfsd_double_loop(s, x, sigma)) <= 1e-12


def test_kfsd_member_keeps_full_divisor(rng):
    s = random_sample(rng, 3)
    sigma = bandwidth_from_percentile(pairwise_distances(s), 50)
    # with the member left out of the sum but n kept as divisor, depth > 0
    assert kfsd(s, s.values[0], sigma) > 1 / 3 - 1e-12


# ---------------------------------------------------------------- HMD


def test_hmd_kernel_at_zero(unit_grid):
    x = np.cos(unit_grid.points)
    s = FunctionalSample(unit_grid, x)
    assert hmd(s, x, 1.0) == pytest.approx(2 / math.sqrt(2 * math.pi), abs=1e-15)
    assert hmd(s, x, 1.0, normalized=True) == pytest.approx(1.0, abs=1e-15)
    assert hmd(FunctionalSample(unit_grid, np.vstack([x, x, x])), x, 1.0) == pytest.approx(3 * HMD_KAPPA0, abs=1e-14)


# ---------------------------------------------------------------- FMD, MBD


def test_fmd_examples(unit_grid):
    x = np.linspace(-1, 1, 51)
    assert fmd(FunctionalSample(unit_grid, x), x) == pytest.approx(0.5, abs=1e-15)
    s = constants([0, 1, 2], unit_grid)
    assert fmd(s, np.ones(51)) == pytest.approx(5 / 6, abs=1e-12)
    assert fmd(s, 5 * np.ones(51)) == pytest.approx(0.5, abs=1e-12)


def test_fmd_on_nonequidistant_grid():
    g = Grid([0.0, 0.1, 1.0])
    s = FunctionalSample(g, [[0, 0, 0], [2, 2, 2]])
    # x sits at F = 1/2 on [0, 0.1] and at F = 1 afterwards
    x = np.array([1.0, 1.0, 3.0])
    expected = (0.05 * 1.0 + (0.05 + 0.45) * 1.0 + 0.45 * 0.5) / 1.0
    assert fmd(s, x) == pytest.approx(expected, abs=1e-12)


def test_mbd_examples(unit_grid):
    s = FunctionalSample(unit_grid, np.vstack([np.sin(unit_grid.points), np.cos(unit_grid.points)]))
    assert mbd(s, s.values[0]) == 1.0 and mbd(s, s.values[1]) == 1.0
    assert mbd(constants([0, 2], unit_grid), np.ones(51)) == 1.0
    assert mbd(constants([0, 1, 2], unit_grid), 3 * np.ones(51)) == 0.0
    with pytest.raises(InsufficientSample):
        mbd(constants([0], unit_grid), np.ones(51))


def test_mbd_matches_pair_loop(rng):
    s = random_sample(rng, 6, m=11)
    x = random_sample(rng, 1, m=11).values[0]
    pairs = list(itertools.combinations(range(6), 2))
    expected = np.mean([
        np.mean([min(s.values[i, t], s.values[j, t]) <= x[t] <= max(s.values[i, t], s.values[j, t]) for t in range(11)])
        for i, j in pairs
    ])
    assert mbd(s, x) == pytest.approx(expected, abs=1e-12)


# ---------------------------------------------------------------- 1-D depths


def test_halfspace_examples():
    u = [1, 2, 3, 4, 5]
    assert halfspace_depth_1d(u, 3) == 0.6
    assert halfspace_depth_1d(u, 1) == 0.2
    assert halfspace_depth_1d(u, 6) == 0.0


def test_simplicial_examples():
    assert simplicial_depth_1d([1, 2, 3], 2) == 1.0
    assert simplicial_depth_1d([1, 2, 3], 0) == 0.0
    assert simplicial_depth_1d([0, 10], 5) == 1.0
    with pytest.raises(InsufficientSample):
        simplicial_depth_1d([1], 1)


def _halfspace_brute(u, v):
    # smallest share of the sample in a closed half-line containing v
    left = sum(1 for a in u if a <= v)
    right = sum(1 for a in u if a >= v)
    return min(left, right) / len(u)


def _simplicial_brute(u, v):
    pairs = list(itertools.combinations(u, 2))
    return sum(1 for a, b in pairs if min(a, b) <= v <= max(a, b)) / len(pairs)


ALPHABET = (0.0, 1.0, 2.0)
PROBES = (-0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5)


def test_one_dimensional_depths_exhaustive():
    checked = 0
    for n in range(1, 7):
        for u in itertools.product(ALPHABET, repeat=n):
            for v in PROBES:
                assert halfspace_depth_1d(u, v) == _halfspace_brute(u, v)
                if n >= 2:
                    assert simplicial_depth_1d(u, v) == pytest.approx(_simplicial_brute(u, v), abs=1e-15)
                checked += 1
    assert checked == sum(3**n for n in range(1, 7)) * len(PROBES)


# ---------------------------------------------------------------- projections


def test_projection_normalization_and_determinism(unit_grid):
    p1 = generate_projections(unit_grid, 1, 7)
    assert abs(math.sqrt(p1.directions.values[0] ** 2 @ unit_grid.weights) - 1) <= 1e-9
    a = generate_projections(unit_grid, 5, 3)
    b = generate_projections(Grid.linspace(0, 1, 51), 5, 3)
    assert np.array_equal(a.directions.values, b.directions.values)
    assert not np.array_equal(a.directions.values, generate_projections(unit_grid, 5, 4).directions.values)


def test_projections_have_zero_mean(unit_grid):
    d = generate_projections(unit_grid, 50, 11).directions.values
    # start at zero, then every point should sit within the Monte Carlo band
    assert np.all(np.abs(d.mean(axis=0)) <= 4 / math.sqrt(50))
    assert np.all(d[:, 0] == 0)


def test_rtd_examples(unit_grid):
    x = np.sin(unit_grid.points)
    proj = generate_projections(unit_grid, 10, 0)
    assert rtd(FunctionalSample(unit_grid, np.vstack([x, x, x])), x, proj) == 1.0
    s = constants([0, 1, 2], unit_grid)
    assert rtd(s, 10 * unit_grid.points, proj) == 0.0


def test_rtd_zero_when_outside_in_one_direction(unit_grid):
    # one direction that separates the query, one that does not
    t = unit_grid.points
    d1 = np.ones(51)
    d2 = np.cos(2 * np.pi * t)
    dirs = np.vstack([d1 / math.sqrt(d1**2 @ unit_grid.weights), d2 / math.sqrt(d2**2 @ unit_grid.weights)])
    proj = type(generate_projections(unit_grid, 1, 0))(FunctionalSample(unit_grid, dirs), -1)
    s = constants([0, 1, 2], unit_grid)
    assert rtd(s, 5 * np.ones(51), proj) == 0.0
    assert rtd(s, np.ones(51), proj) > 0


def test_idd_examples(unit_grid):
    proj = generate_projections(unit_grid, 10, 0)
    s = constants([0, 1], unit_grid)
    assert idd(s, np.full(51, 0.5), proj) == 1.0
    # a Brownian path has nonzero integral almost surely, so a far constant
    # projects outside the sample range in every direction
    assert idd(s, np.full(51, 1e3), proj) == 0.0


def test_rtd_idd_match_per_direction_loop(rng):
    s = random_sample(rng, 5)
    x = random_sample(rng, 1).values[0]
    proj = generate_projections(s.grid, 3, 5)
    w = s.grid.weights
    halfs, simps = [], []
    for d in proj.directions.values:
        u = [float(np.sum(w * y * d)) for y in s.values]
        v = float(np.sum(w * x * d))
        halfs.append(_halfspace_brute(u, v))
        simps.append(_simplicial_brute(u, v))
    assert abs(rtd(s, x, proj) - min(halfs)) <= 1e-12
    assert abs(idd(s, x, proj) - np.mean(simps)) <= 1e-12


def test_projection_grid_mismatch(unit_grid):
    proj = generate_projections(Grid.linspace(0, 1, 11), 2, 0)
    with pytest.raises(GridMismatch):
        rtd(constants([0, 1], unit_grid), np.zeros(51), proj)


# ---------------------------------------------------------------- dispatch


def test_depth_vector_examples(unit_grid, rng):
    s = LabeledSample(FunctionalSample(unit_grid, np.vstack([np.sin(unit_grid.points), np.ones(51)])), [0, 1])
    assert list(depth_vector(s, 0, s.group(0), DepthSpec("FSD")).values) == [1.0]
    two = LabeledSample(constants([0, 2, 7], unit_grid), [0, 0, 1])
    assert list(depth_vector(two, 0, np.ones((1, 51)), DepthSpec.default("MBD")).values) == [1.0]

    group = random_sample(rng, 4)
    other = random_sample(rng, 3)
    ls = LabeledSample(FunctionalSample(unit_grid, np.vstack([group.values, other.values])), [0] * 4 + [1] * 3)
    spec = DepthSpec("KFSD", bandwidth_percentile=50)
    sigma = bandwidth_from_percentile(pairwise_distances(group), 50)
    got = depth_vector(ls, 0, ls.sample, spec).values
    direct = np.array([kfsd(group, x, sigma) for x in ls.values])
    assert np.max(np.abs(got - direct)) <= 1e-12


ALL_SPECS = [
    DepthSpec.default("FMD"),
    DepthSpec.default("HMD"),
    DepthSpec.default("RTD", seed=3),
    DepthSpec.default("IDD", seed=3),
    DepthSpec.default("MBD"),
    DepthSpec("FSD"),
    DepthSpec("KFSD", bandwidth_percentile=25),
]


@settings(max_examples=40, deadline=None)
@given(samples(min_n=3, max_n=7), st.integers(0, len(ALL_SPECS) - 1))
def test_depth_range(s, which):
    spec = ALL_SPECS[which]
    d = compute_depth(s, s.values, spec, normalized_hmd=True)
    assert np.all((d >= 0) & (d <= 1 + 1e-12))
    if spec.kind is DepthKind.HMD:
        raw = compute_depth(s, s.values, spec, normalized_hmd=False)
        assert np.all(raw <= s.n * HMD_KAPPA0 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(samples(min_n=2, max_n=7), st.floats(0.2, 5.0), st.floats(-5, 5), st.floats(-2, 2))
def test_spatial_depths_invariant_under_shift_and_scale(s, c, b0, b1):
    b = b0 + b1 * s.grid.points
    moved = s.map(scale=c, shift=b)
    X, Xm = s.values, c * s.values + b
    assert np.max(np.abs(fsd(s, X) - fsd(moved, Xm))) <= 1e-10
    spec = DepthSpec("KFSD", bandwidth_percentile=50)
    assert np.max(np.abs(compute_depth(s, X, spec) - compute_depth(moved, Xm, spec))) <= 1e-10


def test_determinism_of_projection_depths(rng):
    s = random_sample(rng, 6)
    for kind in ("RTD", "IDD"):
        spec = DepthSpec.default(kind, seed=9)
        assert np.array_equal(compute_depth(s, s.values, spec), compute_depth(s, s.values, spec))
