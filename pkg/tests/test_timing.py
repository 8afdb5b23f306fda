import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from factor_timing.errors import ConfigError, NonpositiveVariance, TooFewObservations, ZeroVariance
from factor_timing.harness import ForecastSeries
from factor_timing.timing import (
    TimingConfig,
    constant_weight,
    constant_weights,
    expanding_variance,
    optimal_weight,
    timed_weights,
)

from oracles import sample_variance


def test_two_point_variance():
    assert expanding_variance([0.01, 0.03], [1, 2], 2) == pytest.approx(0.0002, abs=1e-18)


def test_variance_errors():
    with pytest.raises(ZeroVariance):
        expanding_variance([0.02, 0.02, 0.02], [1, 2, 3], 3)
    with pytest.raises(TooFewObservations):
        expanding_variance([0.02, 0.03], [1, 2], 1)


def test_variance_matches_oracle(rng):
    r = rng.normal(0.005, 0.03, size=50)
    m = np.arange(50)
    for t in (1, 10, 49):
        assert expanding_variance(r, m, t) == pytest.approx(sample_variance(r[: t + 1].tolist()), rel=1e-12)


def test_optimal_weight_hand():
    assert optimal_weight(0.01, 0.0025, TimingConfig(gamma=2)) == pytest.approx(2.0, abs=1e-15)


def test_nonpositive_variance():
    with pytest.raises(NonpositiveVariance):
        optimal_weight(0.01, 0.0)


def test_bad_gamma():
    with pytest.raises(ConfigError):
        TimingConfig(gamma=0)


@settings(max_examples=100, deadline=None)
@given(
    st.floats(-0.05, 0.05, allow_nan=False),
    st.floats(1e-5, 0.01),
    st.floats(0.5, 10),
    st.floats(0.1, 10),
)
def test_homogeneity_and_sign(f, v, gamma, k):
    w = optimal_weight(f, v, TimingConfig(gamma))
    wk = optimal_weight(f, v, TimingConfig(gamma * k))
    assert wk == pytest.approx(w / k, rel=1e-12, abs=1e-300)
    assert np.sign(w) == np.sign(f)


def test_weight_cap():
    assert optimal_weight(1.0, 0.001, TimingConfig(weight_cap=3)) == 3.0
    assert optimal_weight(-1.0, 0.001, TimingConfig(weight_cap=3)) == -3.0


def test_constant_weight_hand():
    # mean 0.003, sample variance 0.0004, gamma 2 -> 3.75
    train = 0.003 + np.array([-1.0, 1.0]) * np.sqrt(0.0002)
    assert constant_weight(train) == pytest.approx(3.75, rel=1e-12)
    ws = constant_weights([200301, 200302, 200303], train)
    assert np.all(ws.weight == ws.weight[0])


def test_timed_weights_use_history_before_t(rng):
    months = np.array([199001 + (i // 12) * 100 + i % 12 for i in range(36)])
    r = rng.normal(0.005, 0.03, size=36)
    fs = ForecastSeries(months[24:], np.full(12, 0.004), r[24:])
    ws = timed_weights(fs, months, r)
    for i in range(12):
        var = sample_variance(r[: 24 + i].tolist())
        assert ws.variance_used[i] == pytest.approx(var, rel=1e-12)
        assert ws.weight[i] == pytest.approx(0.004 / (2 * var), rel=1e-12)


def test_timed_weights_ignore_current_return(rng):
    months = np.array([199001 + (i // 12) * 100 + i % 12 for i in range(36)])
    r = rng.normal(0.005, 0.03, size=36)
    fs = ForecastSeries(months[24:], np.full(12, 0.004), r[24:])
    a = timed_weights(fs, months, r)
    r2 = r.copy()
    r2[30:] += 5.0
    b = timed_weights(fs, months, r2)
    assert np.array_equal(a.weight[:7], b.weight[:7])
    assert not np.array_equal(a.weight[7:], b.weight[7:])


def test_nonnegative_forecasts_give_nonnegative_weights(rng):
    months = np.array([199001 + (i // 12) * 100 + i % 12 for i in range(36)])
    r = rng.normal(0.005, 0.03, size=36)
    fs = ForecastSeries(months[24:], np.maximum(rng.normal(size=12), 0), r[24:])
    assert np.all(timed_weights(fs, months, r).weight >= 0)


def test_history_must_cover_forecasts():
    fs = ForecastSeries([199003], [0.01], [0.0])
    with pytest.raises(TooFewObservations):
        timed_weights(fs, [199001, 199002], [0.01, 0.02])


def test_weights_dump(tmp_path):
    ws = constant_weights([200301], [0.01, 0.03])
    ws.dump(tmp_path / "w.csv")
    lines = (tmp_path / "w.csv").read_text().splitlines()
    assert lines[0] == "yyyymm,weight,variance_used"
    assert lines[1].startswith("200301,")
