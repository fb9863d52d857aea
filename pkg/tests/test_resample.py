from collections import Counter

import numpy as np
import pytest

from lqe.featurize import ExampleSet
from lqe.resample import (
    EmptyInput,
    ResampleStrategy,
    oversample_indices,
    random_oversample,
    random_undersample,
    resample,
    resample_indices,
    undersample_indices,
)


def example_set(counts):
    y = np.concatenate([np.full(n, c) for c, n in enumerate(counts)]).astype(np.int64)
    n = len(y)
    return ExampleSet(np.arange(n, dtype=float)[:, None], y, np.zeros(n, np.int64), np.arange(n))


def test_ros_counts():
    ex = random_oversample(example_set([3, 1, 6]), seed=0)
    assert ex.class_counts().tolist() == [6, 6, 6] and len(ex) == 18


def test_rus_counts():
    ex = random_undersample(example_set([3, 1, 6]), seed=0)
    assert ex.class_counts().tolist() == [1, 1, 1] and len(ex) == 3


def test_balanced_fixed_points():
    ex = example_set([4, 4, 4])
    assert np.array_equal(random_oversample(ex, 1).position, ex.position)
    assert np.array_equal(random_undersample(ex, 1).position, ex.position)


def test_rutgers_like_proportions():
    N = 100_000
    y = np.repeat([0, 1, 2], [34_000, 5_000, 61_000])
    ros = np.bincount(y[oversample_indices(y, np.random.default_rng(0))])
    rus = np.bincount(y[undersample_indices(y, np.random.default_rng(0))])
    assert ros.tolist() == [int(0.61 * N)] * 3
    assert rus.tolist() == [int(0.05 * N)] * 3


def test_absent_class_stays_absent():
    y = np.array([0, 0, 0, 2])
    assert np.bincount(y[resample_indices(y, "ros", 0)], minlength=3).tolist() == [3, 0, 3]


def test_empty_input():
    with pytest.raises(EmptyInput):
        resample_indices(np.array([], dtype=np.int64), "rus", 0)


def test_none_is_identity():
    ex = example_set([2, 5, 1])
    assert np.array_equal(resample(ex, ResampleStrategy.NONE, 0).y, ex.y)


def test_seed_changes_choice_not_counts():
    y = np.repeat([0, 1, 2], [50, 7, 20])
    a = undersample_indices(y, np.random.default_rng(1))
    b = undersample_indices(y, np.random.default_rng(2))
    assert not np.array_equal(a, b)
    assert np.array_equal(np.bincount(y[a]), np.bincount(y[b]))
    assert np.array_equal(undersample_indices(y, np.random.default_rng(1)), a)


def check_ros_rus(y, seed):
    ros = oversample_indices(y, np.random.default_rng(seed))
    rus = undersample_indices(y, np.random.default_rng(seed))
    present = np.unique(y)
    for idx in (ros, rus):
        counts = np.bincount(y[idx], minlength=3)[present]
        assert counts.max() == counts.min()
    # ROS keeps every original at least once; extras are same-class duplicates
    c = Counter(ros.tolist())
    assert set(c) == set(range(len(y)))
    # RUS is a subset without repeats
    assert len(set(rus.tolist())) == len(rus) and set(rus.tolist()) <= set(range(len(y)))


def random_label_sets(n_sets=100, seed=123):
    rng = np.random.default_rng(seed)
    for _ in range(n_sets):
        n = int(rng.integers(1, 400))
        p = rng.dirichlet(np.ones(3))
        yield rng.choice(3, size=n, p=p).astype(np.int64), int(rng.integers(0, 2**31))


def test_invariants_on_random_inputs():
    for y, seed in random_label_sets():
        check_ros_rus(y, seed)
