import hashlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lqe.evaluate import (
    ConfusionMatrix,
    EmptyMatrix,
    TooFewPerClass,
    cross_validate,
    grouped_kfold,
    metrics,
    stratified_kfold,
)
from lqe.featurize import ExampleSet


def example_set(X, y, groups=None):
    n = len(y)
    groups = np.zeros(n, np.int64) if groups is None else np.asarray(groups, np.int64)
    return ExampleSet(np.asarray(X, float), np.asarray(y, np.int64), groups, np.arange(n))


def bands(counts, seed=0, noise=0.3):
    rng = np.random.default_rng(seed)
    y = np.repeat(np.arange(3), counts)
    X = np.c_[y * 3.0 + rng.normal(0, noise, y.size), rng.normal(size=y.size)]
    return example_set(X, y)


def test_thirty_labels_five_folds():
    y = np.repeat([0, 1, 2], 10)
    plan = stratified_kfold(y, 5, seed=0)
    for _, test in plan.folds():
        assert np.bincount(y[test], minlength=3).tolist() == [2, 2, 2]


def test_thirty_one_labels():
    y = np.r_[np.repeat([0, 1, 2], 10), 0]
    plan = stratified_kfold(y, 5, seed=0)
    sizes = sorted(len(t) for _, t in plan.folds())
    assert sizes == [6, 6, 6, 6, 7]
    zeros = sorted(int((y[t] == 0).sum()) for _, t in plan.folds())
    assert zeros == [2, 2, 2, 2, 3]


def test_too_few_per_class():
    with pytest.raises(TooFewPerClass):
        stratified_kfold(np.r_[np.zeros(20), np.ones(3)], 5, 0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=20, max_size=200), st.integers(2, 10), st.integers(0, 2**32))
def test_stratification_property(labels, k, seed):
    y = np.array(labels)
    if np.bincount(y)[np.unique(y)].min() < k:
        with pytest.raises(TooFewPerClass):
            stratified_kfold(y, k, seed)
        return
    plan = stratified_kfold(y, k, seed)
    seen = np.zeros(y.size, int)
    sizes = []
    for train, test in plan.folds():
        seen[test] += 1
        assert np.intersect1d(train, test).size == 0 and train.size + test.size == y.size
        sizes.append(test.size)
        for c in np.unique(y):
            n_c = (y == c).sum()
            assert abs((y[test] == c).sum() - n_c / k) < 1
    assert (seen == 1).all()
    assert max(sizes) - min(sizes) <= 1


def test_grouped_folds_keep_links_together():
    groups = np.repeat(np.arange(12), np.arange(1, 13))
    plan = grouped_kfold(groups, 4, 0)
    for _, test in plan.folds():
        for g in np.unique(groups[test]):
            assert np.isin(np.flatnonzero(groups == g), test).all()


def test_metrics_example():
    # rows predicted, columns actual
    cm = ConfusionMatrix(np.array([[8, 1, 0], [2, 3, 1], [0, 1, 9]]))
    m = metrics(cm)
    assert m["accuracy"] == pytest.approx(20 / 25)
    assert m["per_class_recall"] == pytest.approx([0.8, 0.6, 0.9])
    assert m["per_class_precision"] == pytest.approx([8 / 9, 0.5, 0.9])
    np.testing.assert_allclose(np.sum(m["column_normalized"], axis=0), 1)
    np.testing.assert_allclose(np.sum(m["row_normalized"], axis=1), 1)


def test_from_predictions_orientation():
    cm = ConfusionMatrix.from_predictions(actual=[0, 0, 2], predicted=[1, 0, 2])
    assert cm.tolist() == [[1, 0, 0], [1, 0, 0], [0, 0, 1]]


def test_zero_column_gives_zero_recall():
    m = metrics(ConfusionMatrix(np.array([[3, 0, 0], [0, 0, 0], [1, 0, 2]])))
    assert m["per_class_recall"][1] == 0.0


def test_empty_matrix():
    with pytest.raises(EmptyMatrix):
        metrics(ConfusionMatrix(np.zeros((3, 3), int)))


def test_pooled_total_conservation():
    ex = bands([40, 15, 25])
    rep = cross_validate(ex, "dtree", {}, "ros", k=5, repeats=3, seed=1)
    assert rep.pooled.total == 80 * 3
    assert len(rep.folds) == 15


def test_majority_baseline():
    ex = bands([34, 5, 61])
    rep = cross_validate(ex, "majority", {}, "none", k=5, repeats=2, seed=0)
    assert rep.accuracy_mean == pytest.approx(0.61, abs=0.011)
    assert rep.recall_mean(1) == 0.0
    assert rep.recall_mean(2) == 1.0


def test_separable_bands_perfect():
    rep = cross_validate(bands([30, 30, 30], noise=0.1), "dtree", {}, "none", k=5, repeats=2, seed=0)
    assert rep.accuracy_mean == 1.0


@pytest.mark.parametrize("strategy", ["none", "ros", "rus"])
def test_no_leakage(strategy):
    ex = bands([40, 10, 30], seed=3)
    before = hashlib.sha256(ex.X.tobytes()).hexdigest()
    seen = []

    def audit(r, f, train, test, rows, model):
        assert np.intersect1d(train, test).size == 0
        assert np.isin(rows, train).all()
        # scaler is fitted on the original training rows, before re-sampling
        np.testing.assert_allclose(model.scaler.means, ex.X[train].mean(axis=0))
        counts = np.bincount(ex.y[rows], minlength=3)
        if strategy != "none":
            assert counts.min() == counts.max()
        seen.append((r, f))

    cross_validate(ex, "logreg", {}, strategy, k=4, repeats=2, seed=5, on_fold=audit)
    assert seen == [(r, f) for r in range(2) for f in range(4)]
    assert hashlib.sha256(ex.X.tobytes()).hexdigest() == before


def test_determinism():
    ex = bands([30, 12, 20], seed=2)
    a = cross_validate(ex, "rforest", {"n_trees": 5}, "ros", k=3, repeats=2, seed=9).to_dict()
    b = cross_validate(ex, "rforest", {"n_trees": 5}, "ros", k=3, repeats=2, seed=9).to_dict()
    assert a == b
    tests = {}
    for seed in (9, 10):
        log = tests.setdefault(seed, [])
        cross_validate(ex, "majority", {}, "none", k=3, repeats=1, seed=seed, on_fold=lambda *a: log.append(a[3].tolist()))
    assert tests[9] != tests[10]


def test_report_std_is_sample_std():
    rep = cross_validate(bands([20, 20, 20], noise=1.5), "logreg", {}, "none", k=4, repeats=1, seed=0)
    d = rep.to_dict()
    assert d["accuracy"]["std"] == pytest.approx(np.std(rep.accuracies, ddof=1))
    assert "cross_validate_seconds" not in str(d)
