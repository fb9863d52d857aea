"""One test per acceptance criterion; the terminal summary prints one line each.

Criteria 3 and 4 need the public Rutgers trace-set: point ``LQE_RUTGERS_ROOT``
at its root directory to run them.
"""
import os
import time

import numpy as np
import pytest

from lqe import learn
from lqe.evaluate import cross_validate, stratified_kfold
from lqe.experiment import DataSource, PipelineConfig, build_dataset, evaluate_config
from lqe.featurize import WINDOW_GRID, FeatureSpec, LinkClass, WindowConfig, build_examples, label_from_prr
from lqe.learn.forest import RandomForest
from lqe.learn.linear import logreg_loss_grad
from lqe.learn.mlp import init_params, mlp_loss_grad
from lqe.learn.tree import DecisionTree
from lqe.preprocess import interpolate
from lqe.resample import oversample_indices, undersample_indices
from lqe.synthgen import RUTGERS_LIKE
from lqe.trace_model import load_trace_set, trace_stats

from .conftest import make_trace
from .test_evaluate import bands
from .test_learn import numeric_grad
from .test_resample import check_ros_rus, random_label_sets

pytestmark = pytest.mark.acceptance
RUTGERS = os.environ.get("LQE_RUTGERS_ROOT")
needs_rutgers = pytest.mark.skipif(not RUTGERS, reason="LQE_RUTGERS_ROOT not set; Rutgers trace-set unavailable")


class Clock:
    def __init__(self, limit):
        self.limit = limit

    def __enter__(self):
        self.t = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t
        if exc[0] is None:
            assert self.elapsed < self.limit, f"took {self.elapsed:.1f}s, budget {self.limit}s"


@pytest.mark.criterion(1, "label_from_prr exact over the 0.01 grid")
def test_c1_labels():
    with Clock(1):
        for i in range(101):
            p = i / 100
            want = LinkClass.BAD if p <= 0.1 else LinkClass.GOOD if p >= 0.9 else LinkClass.INTERMEDIATE
            assert label_from_prr(p) is want, p


@pytest.mark.criterion(2, "fixture trace statistics exact")
def test_c2_fixture(fixture_dir):
    with Clock(1):
        ts = load_trace_set(fixture_dir)
        st = trace_stats(ts)
        assert (st.n_traces, st.n_empty_traces, st.packets_sent, st.packets_received) == (3, 1, 900, 449)
        good = next(t for t in ts if (t.noise_dbm, t.src, t.dst) == (-10, 1, 2))
        assert good.rssi[149] is None  # seq 150 carried 128, the hardware error flag
        assert good.n_received == 299
        empty = next(t for t in ts if (t.src, t.dst) == (2, 1))
        assert empty.n_received == 0 and len(empty.rssi) == 300


@needs_rutgers
@pytest.mark.criterion(3, "full Rutgers trace-set statistics")
def test_c3_rutgers_stats():
    with Clock(60):
        st = trace_stats(load_trace_set(RUTGERS))
    assert (st.n_traces, st.n_empty_traces, st.packets_sent, st.packets_received) == (4060, 960, 1_218_000, 773_568)


def _rutgers(**kw):
    base = dict(data=DataSource("rutgers", RUTGERS), k=10, repeats=3, seed=0)
    return evaluate_config(PipelineConfig(**{**base, **kw}))


@needs_rutgers
@pytest.mark.slow
@pytest.mark.criterion(4, "headline results on the Rutgers trace-set")
def test_c4_rutgers_headline():
    ros = _rutgers()
    assert abs(ros.accuracy_mean - 0.952) <= 0.015
    assert abs(ros.recall_mean(1) - 0.87) <= 0.05
    none = _rutgers(resample="none")
    assert abs(none.accuracy_mean - 0.972) <= 0.010
    assert abs(none.recall_mean(1) - 0.61) <= 0.05
    rssi = _rutgers(features="rssi")
    assert abs(rssi.accuracy_mean - 0.89) <= 0.02
    assert abs(rssi.recall_mean(1) - 0.38) <= 0.06
    for kind in ("logreg", "svm", "dtree", "rforest", "mlp"):
        acc = _rutgers(model=kind).accuracy_mean
        assert 0.93 <= acc <= 0.965, (kind, acc)


@pytest.mark.criterion(5, "rutgers-like preset: ROS lifts intermediate recall >= 10pp, accuracy drop <= 4pp")
def test_c5_synthetic_resampling():
    with Clock(120):
        base = PipelineConfig(DataSource("synth", synth=RUTGERS_LIKE.to_dict()), k=10, repeats=2, seed=0)
        ex = build_dataset(base)
        none = cross_validate(ex, "dtree", None, "none", k=base.k, repeats=base.repeats, seed=0)
        ros = cross_validate(ex, "dtree", None, "ros", k=base.k, repeats=base.repeats, seed=0)
    gain = ros.recall_mean(1) - none.recall_mean(1)
    drop = none.accuracy_mean - ros.accuracy_mean
    print(
        f"none acc {none.accuracy_mean:.4f} int-recall {none.recall_mean(1):.4f} | "
        f"ros acc {ros.accuracy_mean:.4f} int-recall {ros.recall_mean(1):.4f}"
    )
    assert gain >= 0.10
    assert drop <= 0.04


@pytest.mark.criterion(6, "example count 300 - w_history - w_prr + 1 over the window grid")
def test_c6_window_counts():
    with Clock(1):
        pt = interpolate(make_trace([55] * 300), "zero")
        spec = FeatureSpec.parse("rssi")
        for wh in WINDOW_GRID:
            for wp in WINDOW_GRID:
                assert len(build_examples(pt, WindowConfig(wh, wp), spec)) == 300 - wh - wp + 1


@pytest.mark.criterion(7, "gradients match finite differences; tree and forest oracles")
def test_c7_learners():
    with Clock(10):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(10, 3))
        y = rng.integers(0, 3, 10)
        W, b = rng.normal(size=(3, 3)), rng.normal(size=3)
        _, gW, gb = logreg_loss_grad(W, b, X, y, 0.01)
        for g, n in zip((gW, gb), numeric_grad(lambda: logreg_loss_grad(W, b, X, y, 0.01)[0], [W, b])):
            np.testing.assert_allclose(g, n, rtol=1e-5, atol=1e-9)
        params = init_params(3, 6, rng)
        params[1] = rng.normal(size=6) * 0.5
        _, grads = mlp_loss_grad(params, X, y)
        for g, n in zip(grads, numeric_grad(lambda: mlp_loss_grad(params, X, y)[0], params)):
            np.testing.assert_allclose(g, n, rtol=1e-5, atol=1e-9)

        X1 = np.array([[0.0], [0.2], [0.8], [1.0]])
        y1 = np.array([0, 0, 2, 2])
        m = learn.fit("dtree", {"min_samples_leaf": 1}, X1, y1)
        assert (m.predict(X1) == y1).all()
        assert m.estimator.tree.n_leaves == 2

        ex = bands([40, 15, 30], seed=1, noise=1.2)
        Xb, yb = ex.X, ex.y
        rf = RandomForest(n_trees=1, bootstrap=False, features_per_split=Xb.shape[1]).fit(Xb, yb)
        dt = DecisionTree(ccp_alpha_grid=(0.0,)).fit(Xb, yb)
        assert rf.trees[0].to_dict() == dt.tree.to_dict()
        assert np.array_equal(rf.predict_scores(Xb).argmax(1), dt.predict_scores(Xb).argmax(1))


@pytest.mark.criterion(8, "ROS/RUS balance, superset and subset on 100 random inputs")
def test_c8_resampling():
    with Clock(5):
        for y, seed in random_label_sets(100, seed=8):
            check_ros_rus(y, seed)
        y = np.repeat([0, 1, 2], [6, 3, 1])
        assert len(oversample_indices(y, np.random.default_rng(0))) == 18
        assert len(undersample_indices(y, np.random.default_rng(0))) == 3


@pytest.mark.criterion(9, "stratified folds within one per class; no train-to-test leakage")
def test_c9_folds_and_leakage():
    with Clock(5):
        rng = np.random.default_rng(9)
        for _ in range(100):
            n = int(rng.integers(30, 300))
            y = rng.choice(3, n, p=rng.dirichlet(np.ones(3) * 3))
            if np.bincount(y, minlength=3).min() < 10:
                continue
            plan = stratified_kfold(y, 10, int(rng.integers(2**31)))
            per_fold = np.array([np.bincount(y[t], minlength=3) for _, t in plan.folds()])
            assert (per_fold.max(axis=0) - per_fold.min(axis=0) <= 1).all()

        ex = bands([40, 12, 30], seed=4)
        X_before = ex.X.copy()

        def audit(r, f, train, test, rows, model):
            assert np.intersect1d(train, test).size == 0
            assert np.isin(rows, train).all()
            np.testing.assert_array_equal(model.scaler.means, ex.X[train].mean(axis=0))

        cross_validate(ex, "dtree", {}, "ros", k=5, repeats=2, seed=0, on_fold=audit)
        assert np.array_equal(ex.X, X_before)


@pytest.mark.criterion(10, "two runs on the fixture give byte-identical reports")
def test_c10_determinism(fixture_dir, tmp_path):
    from lqe.cli import main

    with Clock(30):
        for name in ("a", "b"):
            assert main(["run", "--data", str(fixture_dir), "--out", str(tmp_path / name)]) == 0
    for f in ("report.json", "config.json", "confusion.csv", "confusion.svg"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes(), f
