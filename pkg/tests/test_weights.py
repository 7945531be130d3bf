import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from adar.errors import ConfigurationError, ParameterError
from adar.model import SeriesFrame
from adar.weights import WeightScheme, compute_weights


def frame(values, m=1):
    return SeriesFrame.from_series(values, m)


def test_inverse_sixth_power_examples():
    w = compute_weights(WeightScheme("hv", m=1), frame([0.0, 1.0, 2.0]))
    assert_allclose(w, [1.0, 0.5])


def test_truncation_zero_a_gives_one():
    fr = frame([0.1, 0.2, 0.1, 5.0, 0.0])
    w = compute_weights(WeightScheme("ling", m=1, c_w=1.0), fr)
    assert_allclose(w, [1.0, 1.0, 1.0, (1.0 / 25.0) ** 3])


def test_unit_exactly_one():
    w = compute_weights(WeightScheme("unit"), frame(np.arange(10.0)))
    assert_array_equal(w, np.ones(9))


@pytest.mark.parametrize("alias,kind", [("none", "unit"), ("hv", "inverse-sixth-power"), ("ling", "truncation")])
def test_aliases(alias, kind):
    assert WeightScheme(alias).kind == kind


def test_bad_scheme():
    with pytest.raises(ParameterError):
        WeightScheme("huber")
    with pytest.raises(ParameterError):
        WeightScheme("ling", percentile=100)


def test_percentile_degenerate_series():
    with pytest.raises(ConfigurationError):
        compute_weights(WeightScheme("ling", m=2), SeriesFrame.from_series(np.zeros(50), 2))


def test_window_defaults_to_frame_lags():
    fr = SeriesFrame.from_series([3.0, 1.0, 0.0, 0.0], 2)
    w = compute_weights(WeightScheme("hv"), fr)
    assert_allclose(w, [1 / (1 + 1 + 3.0**6), 1 / 2])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=8, max_size=40), st.sampled_from(["hv", "ling"]), st.integers(1, 4))
def test_weights_in_unit_interval(values, kind, m):
    values = np.asarray(values)
    if kind == "ling" and not np.any(values**2 > 0):
        return
    fr = SeriesFrame.from_series(values, m)
    w = compute_weights(WeightScheme(kind, m=m), fr)
    assert np.all(w > 0) and np.all(w <= 1)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 5), st.floats(0, 5))
def test_inverse_sixth_power_decreasing(a, b):
    lo, hi = sorted((abs(a), abs(b)))
    if hi - lo < 1e-3:
        return
    w = compute_weights(WeightScheme("hv", m=1), frame([lo, 0.0, hi, 0.0]))
    assert w[0] > w[2]
    w2 = compute_weights(WeightScheme("hv", m=1), frame([-lo, 0.0, -hi, 0.0]))
    assert_allclose(w, w2)


@pytest.mark.parametrize("kind", ["hv", "ling"])
def test_past_measurable(kind, rng):
    y = rng.standard_normal(200)
    scheme = WeightScheme(kind, m=3, c_w=0.8)
    base = compute_weights(scheme, SeriesFrame.from_series(y, 3))
    t = 100
    y2 = y.copy()
    # observation t (1-based, after 3 presample values) sits at index 3 + t - 1
    y2[3 + t - 1 :] += rng.standard_normal(y2.size - (3 + t - 1)) * 10
    other = compute_weights(scheme, SeriesFrame.from_series(y2, 3))
    assert_array_equal(base[:t], other[:t])
    assert not np.array_equal(base[t:], other[t:])
