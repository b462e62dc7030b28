import numpy as np
import pytest

from conftest import labeled_constants
from fdepth.classify import ClassifierSpec, decide, decision_scores, trimmed_mean
from fdepth.core import DepthSpec, FunctionalSample, Grid, InsufficientSample, LabeledSample
from fdepth.depths import kfsd
from fdepth.geometry import bandwidth_from_percentile, l2_distance, pairwise_distances
from fdepth.modelselect import (
    DEFAULT_PERCENTILES,
    TieLevel,
    cv_select_percentile,
    make_cv_plan,
    tiebreak_score,
)
from fdepth.simulate import CgpSpec, generate_cgp

KFSD15 = DepthSpec("KFSD", bandwidth_percentile=15)


def _labeled(rng, n0, n1, m=21, gap=0.6):
    g = Grid.linspace(0, 1, m)
    v = rng.normal(size=(n0 + n1, m)).cumsum(axis=1) / np.sqrt(m)
    v[n0:] += gap
    return LabeledSample(FunctionalSample(g, v), [0] * n0 + [1] * n1)


# ---------------------------------------------------------------- folds


@pytest.mark.parametrize("sizes,per_fold", [((25, 25), (5, 5)), ((40, 30), (8, 6))])
def test_fold_sizes(rng, sizes, per_fold):
    s = _labeled(rng, *sizes)
    plan = make_cv_plan(s, 5, 3)
    for f in range(5):
        _, test = plan.split(s, f)
        assert (test.count(0), test.count(1)) == per_fold


def test_folds_balanced_within_one(rng):
    s = _labeled(rng, 12, 8)
    plan = make_cv_plan(s, 5, 0)
    sizes = np.bincount(plan.fold_assignment, minlength=5)
    assert sizes.max() - sizes.min() <= 1
    for f in range(5):
        _, test = plan.split(s, f)
        assert test.count(0) > 0 and test.count(1) > 0


def test_plan_deterministic(rng):
    s = _labeled(rng, 10, 10)
    assert np.array_equal(make_cv_plan(s, 5, 7).fold_assignment, make_cv_plan(s, 5, 7).fold_assignment)
    assert not np.array_equal(make_cv_plan(s, 5, 7).fold_assignment, make_cv_plan(s, 5, 8).fold_assignment)


def test_plan_needs_enough_curves(rng):
    with pytest.raises(InsufficientSample):
        make_cv_plan(_labeled(rng, 10, 4), 5, 0)


# ---------------------------------------------------------------- selection


def test_single_percentile_grid(rng):
    s = _labeled(rng, 10, 10)
    choice = cv_select_percentile(s, ClassifierSpec("WMD", KFSD15), [33.0], make_cv_plan(s, 5, 0))
    assert choice.percentile == 33.0 and not choice.required_cv and choice.tie_level is TieLevel.PRIMARY


def test_separated_groups_defer_to_secondary(unit_grid):
    s = labeled_constants([0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
                          [100, 100.3, 100.6, 100.9, 101.2, 101.5, 101.8, 102.1, 102.4, 102.7], unit_grid)
    for method in ("DTM", "WAD", "WMD"):
        choice = cv_select_percentile(s, ClassifierSpec(method, KFSD15), DEFAULT_PERCENTILES, make_cv_plan(s, 5, 1))
        assert not choice.required_cv and choice.cv_error == 0.0
        assert choice.tie_level in (TieLevel.SECONDARY, TieLevel.RANDOM)
        assert set(choice.secondary) == set(DEFAULT_PERCENTILES)


def test_selection_attains_minimum_by_recomputation(rng):
    s = _labeled(rng, 15, 15, gap=0.3)
    plan = make_cv_plan(s, 5, 2)
    for method in ("DTM", "WAD", "WMD"):
        base = ClassifierSpec(method, KFSD15)
        choice = cv_select_percentile(s, base, DEFAULT_PERCENTILES, plan)
        recount = {}
        for p in DEFAULT_PERCENTILES:
            spec = base.with_depth(DepthSpec("KFSD", bandwidth_percentile=p))
            wrong = 0
            for f in range(5):
                tr, te = plan.split(s, f)
                wrong += sum(q.label != t for q, t in zip(decide(decision_scores(tr, te.values, spec), spec), te.labels))
            recount[p] = wrong
        assert recount == choice.errors
        assert choice.percentile in DEFAULT_PERCENTILES
        assert recount[choice.percentile] == min(recount.values())
        assert choice.cv_error == min(recount.values()) / s.n
        assert choice.required_cv == (len(set(recount.values())) > 1)


def test_selection_deterministic(rng):
    s = _labeled(rng, 10, 10, gap=0.2)
    plan = make_cv_plan(s, 5, 4)
    spec = ClassifierSpec("WMD", KFSD15)
    assert cv_select_percentile(s, spec, DEFAULT_PERCENTILES, plan) == cv_select_percentile(s, spec, DEFAULT_PERCENTILES, plan)


def test_knn_has_no_bandwidth(rng):
    s = _labeled(rng, 10, 10)
    with pytest.raises(ValueError):
        cv_select_percentile(s, ClassifierSpec("KNN"), DEFAULT_PERCENTILES, make_cv_plan(s, 5, 0))


def test_strictly_dominant_percentile_is_primary(rng, monkeypatch):
    import fdepth.modelselect as ms

    s = _labeled(rng, 10, 10)
    real = ms.decision_scores

    def rigged(train, X, spec):
        scores = real(train, X, spec)
        if spec.depth.bandwidth_percentile != 50.0:
            scores = scores[:, ::-1]  # deliberately wrong on every fold
        return scores

    monkeypatch.setattr(ms, "decision_scores", rigged)
    choice = cv_select_percentile(s, ClassifierSpec("WMD", KFSD15), DEFAULT_PERCENTILES, make_cv_plan(s, 5, 0))
    assert choice.percentile == 50.0 and choice.tie_level is TieLevel.PRIMARY


# ---------------------------------------------------------------- secondary criterion


def test_tiebreak_wmd_identical_group(unit_grid):
    x = np.sin(unit_grid.points)
    train = LabeledSample(FunctionalSample(unit_grid, np.vstack([x, x, x, x + 3, x + 4])), [0, 0, 0, 1, 1])
    test = LabeledSample(FunctionalSample(unit_grid, x), [0])
    assert tiebreak_score(ClassifierSpec("WMD", KFSD15), train, test, 50) == 1.0


def test_tiebreak_dtm_at_trimmed_mean(unit_grid):
    train = labeled_constants([0, 1, 2, 9], [20, 21, 22], unit_grid)
    spec = ClassifierSpec("DTM", KFSD15)
    m = trimmed_mean(train, 0, DepthSpec("KFSD", bandwidth_percentile=50), 0.2)
    test = LabeledSample(FunctionalSample(unit_grid, m), [0])
    assert tiebreak_score(spec, train, test, 50) == pytest.approx(0.0, abs=1e-12)


def test_tiebreak_four_curve_oracle(rng):
    g = Grid.linspace(0, 1, 21)
    train = LabeledSample(FunctionalSample(g, rng.normal(size=(4, 21))), [0, 0, 1, 1])
    test = LabeledSample(FunctionalSample(g, rng.normal(size=(2, 21))), [0, 1])
    train4 = LabeledSample(FunctionalSample(g, np.vstack([rng.normal(size=(4, 21)), rng.normal(size=(4, 21))])),
                           [0] * 4 + [1] * 4)

    def sigma(group):
        return bandwidth_from_percentile(pairwise_distances(group), 50)

    # WMD: summed own-group KFSD
    expected = sum(kfsd(train.group(y), x, sigma(train.group(y))) for x, y in zip(test.values, test.labels))
    assert abs(tiebreak_score(ClassifierSpec("WMD", KFSD15), train, test, 50) - expected) <= 1e-12

    # WAD: depth-weighted mean distance to own group
    expected = 0.0
    for x, y in zip(test.values, test.labels):
        grp = train.group(y)
        w = [kfsd(grp, c, sigma(grp)) for c in grp.values]
        expected += sum(wi * l2_distance(x, c, g) for wi, c in zip(w, grp.values)) / sum(w)
    assert abs(tiebreak_score(ClassifierSpec("WAD", KFSD15), train, test, 50) - expected) <= 1e-12

    # DTM with 4 curves per group: alpha 0.25 keeps the 3 deepest
    expected = 0.0
    for x, y in zip(test.values, test.labels):
        grp = train4.group(y)
        d = [kfsd(grp, c, sigma(grp)) for c in grp.values]
        keep = sorted(range(4), key=lambda i: -d[i])[:3]
        expected += l2_distance(x, grp.values[keep].mean(axis=0), g)
    got = tiebreak_score(ClassifierSpec("DTM", KFSD15, alpha=0.25), train4, test, 50)
    assert abs(got - expected) <= 1e-12


def test_tiebreak_rejects_knn(rng):
    s = _labeled(rng, 4, 4)
    with pytest.raises(ValueError):
        tiebreak_score(ClassifierSpec("KNN", k=1), s, s, 50)


def test_cgp1_replication_runs_cv():
    s = generate_cgp(CgpSpec("CGP1", n0=25, n1=25, seed=5))
    choice = cv_select_percentile(s, ClassifierSpec("WMD", KFSD15), DEFAULT_PERCENTILES, make_cv_plan(s, 5, 5))
    assert set(choice.errors) == set(DEFAULT_PERCENTILES)
    assert sum(choice.errors.values()) <= 7 * 5  # near-perfect separation
