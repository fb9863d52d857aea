import statistics

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lqe.featurize import (
    FEATURE_GRID,
    WINDOW_GRID,
    DomainError,
    FeatureSpec,
    LinkClass,
    MissingData,
    RangeError,
    Term,
    WindowConfig,
    build_examples,
    example_count,
    label_from_prr,
    labels_from_prr,
    prr,
    window_features,
)
from lqe.preprocess import PreparedTrace, interpolate

from .conftest import make_trace


def test_prr_counts():
    mask = [True] * 7 + [False] * 3
    assert prr(mask, 0, 10) == 0.7
    assert prr([True] * 10, 0, 10) == 1.0
    assert prr([False] * 10, 0, 10) == 0.0
    with pytest.raises(RangeError):
        prr(mask, 5, 10)


@pytest.mark.parametrize("p, expected", [(0.10, LinkClass.BAD), (0.90, LinkClass.GOOD), (0.50, LinkClass.INTERMEDIATE)])
def test_label_boundaries(p, expected):
    assert label_from_prr(p) is expected


def test_label_domain():
    for p in (-0.01, 1.01, float("nan")):
        with pytest.raises(DomainError):
            label_from_prr(p)


def test_vector_labels_match_scalar():
    grid = np.arange(101) / 100
    assert [int(label_from_prr(p)) for p in grid] == labels_from_prr(grid).tolist()


def test_class_order():
    assert LinkClass.BAD < LinkClass.INTERMEDIATE < LinkClass.GOOD


def test_constant_window():
    spec = FeatureSpec.parse("rssi,rssi_avg,rssi_std")
    assert window_features([40.0] * 20, 15, 10, spec).tolist() == [40.0, 40.0, 0.0]


def test_zero_power_convention():
    assert window_features([5.0, 0.0], 1, 2, FeatureSpec.parse("rssi^-2")).tolist() == [0.0]


def test_mean_and_population_std():
    series = list(range(1, 11))
    got = window_features(series, 9, 10, FeatureSpec.parse("rssi_avg,rssi_std"))
    assert got[0] == statistics.fmean(series) == 5.5
    assert got[1] == pytest.approx(statistics.pstdev(series), rel=1e-15)
    assert got[1] == pytest.approx(2.8722813232690143, rel=1e-15)


def test_gradient():
    spec = FeatureSpec.parse("grad_rssi")
    assert window_features([3.0, 7.0, 4.0], 2, 2, spec).tolist() == [-3.0]


def test_missing_data():
    with pytest.raises(MissingData):
        window_features([1.0, np.nan, 3.0], 2, 3, FeatureSpec.parse("rssi"))


def test_spec_parsing():
    assert FeatureSpec.parse("rssi_avg^-4..4").names == [
        "rssi_avg^-4", "rssi_avg^-3", "rssi_avg^-2", "rssi_avg^-1", "rssi_avg", "rssi_avg^2", "rssi_avg^3", "rssi_avg^4",
    ]
    assert FeatureSpec.parse("rssi, rssi_avg").terms == (Term("rssi"), Term("rssi_avg"))
    assert len(FEATURE_GRID) == 15
    for text in FEATURE_GRID:
        FeatureSpec.parse(text)
    for bad in ["", "rssi,rssi", "snr", "rssi_std^2", "rssi^5", "rssi^3..1"]:
        with pytest.raises(ValueError):
            FeatureSpec.parse(bad)


def test_window_config_limits():
    WindowConfig(100, 100).validate(300)
    for wh, wp, n in [(1, 10, 300), (10, 101, 300), (10, 10, 15)]:
        with pytest.raises(ValueError):
            WindowConfig(wh, wp).validate(n)


def test_281_examples_for_ten_ten():
    pt = interpolate(make_trace([50] * 300), "zero")
    ex = build_examples(pt, WindowConfig(10, 10), FeatureSpec.parse("rssi"))
    assert len(ex) == 281 == example_count(300, 10, 10)
    assert (ex.y == LinkClass.GOOD).all()
    assert ex.position[0] == 9 and ex.position[-1] == 289


def test_empty_trace_under_zero():
    pt = interpolate(make_trace([None] * 300), "zero")
    ex = build_examples(pt, WindowConfig(10, 10), FeatureSpec.parse("rssi,rssi_avg,rssi_std,rssi^-1"))
    assert (ex.y == LinkClass.BAD).all()
    assert (ex.X == 0).all()


def test_no_interp_drops_incomplete_windows():
    raw = [50] * 300
    raw[100] = None
    pt = interpolate(make_trace(raw), "none")
    ex = build_examples(pt, WindowConfig(10, 10), FeatureSpec.parse("rssi_avg"))
    # positions 100..109 have the gap in their history window
    assert ex.dropped == 10 and len(ex) == 271
    assert not np.isin(np.arange(100, 110), ex.position).any()


def test_label_window_follows_history():
    raw = [50] * 300
    for i in range(20, 30):
        raw[i] = None  # packets 20..29 lost
    pt = interpolate(make_trace(raw), "zero")
    ex = build_examples(pt, WindowConfig(10, 10), FeatureSpec.parse("rssi"))
    labels = dict(zip(ex.position.tolist(), ex.y.tolist()))
    assert labels[19] == LinkClass.BAD  # label window 20..29
    assert labels[9] == LinkClass.GOOD  # label window 10..19
    assert labels[14] == LinkClass.INTERMEDIATE  # 5 of 10 received


series_st = st.lists(st.one_of(st.none(), st.integers(0, 127), st.just(0)), min_size=60, max_size=60)
grid_terms = ["rssi", "grad_rssi", "rssi_avg", "rssi_std"] + [f"rssi^{k}" for k in (-4, -1, 2, 4)] + [
    f"rssi_avg^{k}" for k in (-4, -2, 3)
]


@settings(max_examples=60, deadline=None)
@given(series_st, st.integers(2, 20), st.integers(2, 20), st.sampled_from(["zero", "gaussian", "none"]))
def test_vectorised_matches_direct(raw, wh, wp, strategy):
    spec = FeatureSpec.parse(",".join(grid_terms))
    mask = np.array([r is not None for r in raw])
    series = np.array([np.nan if r is None else r for r in raw], dtype=float)
    if strategy == "zero":
        series = np.where(mask, series, 0.0)
    pt = PreparedTrace(series, mask)
    ex = build_examples(pt, WindowConfig(wh, wp), spec)
    assert np.isfinite(ex.X).all()
    expected_pos = []
    for i in range(wh - 1, 60 - wp):
        try:
            f = window_features(series, i, wh, spec)
        except MissingData:
            continue
        expected_pos.append(i)
        j = len(expected_pos) - 1
        np.testing.assert_allclose(ex.X[j], f, rtol=1e-12, atol=1e-12)
        assert ex.y[j] == label_from_prr(prr(mask, i + 1, wp))
    assert ex.position.tolist() == expected_pos


@settings(max_examples=30, deadline=None)
@given(st.lists(st.one_of(st.none(), st.integers(0, 127)), min_size=300, max_size=300))
def test_labels_identical_across_strategies(raw):
    t = make_trace(raw)
    spec = FeatureSpec.parse("rssi")
    wc = WindowConfig(10, 10)
    zero = build_examples(interpolate(t, "zero"), wc, spec)
    gauss = build_examples(interpolate(t, "gaussian", seed=4), wc, spec)
    none = build_examples(interpolate(t, "none"), wc, spec)
    assert np.array_equal(zero.y, gauss.y) and np.array_equal(zero.position, gauss.position)
    keep = np.isin(zero.position, none.position)
    assert np.array_equal(zero.y[keep], none.y)


@pytest.mark.parametrize("wh", WINDOW_GRID)
def test_count_formula_grid(wh):
    pt = interpolate(make_trace([60] * 300), "zero")
    for wp in WINDOW_GRID:
        assert len(build_examples(pt, WindowConfig(wh, wp), FeatureSpec.parse("rssi"))) == 300 - wh - wp + 1
