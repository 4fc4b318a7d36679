import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from focsim.simcore import (
    SimClock,
    SimulationDiverged,
    TimeSeries,
    WindowRangeError,
    extract_window,
    read_timeseries_csv,
    rk4_step,
)


def test_zero_dynamics_leave_state_unchanged():
    x = np.array([1.5, -2.0, 3.25])
    np.testing.assert_array_equal(rk4_step(lambda s: np.zeros_like(s), x, 1e-3), x)


def test_constant_rate_is_exact():
    c = np.array([2.0, -0.5])
    x = np.array([1.0, 1.0])
    np.testing.assert_allclose(rk4_step(lambda s: c, x, 0.01), x + 0.01 * c, rtol=0, atol=1e-15)


def test_decay_matches_exponential():
    out = rk4_step(lambda s: -s, np.array([1.0]), 1e-3)
    assert abs(out[0] - math.exp(-1e-3)) < 1e-12
    assert out[0] == pytest.approx(0.9990004998, abs=1e-10)


def test_fourth_order_convergence():
    # at dt = 1e-3 the one-step error of dx/dt = -x is ~1e-17, below double
    # precision; dx/dt = -100 x over the same dt set has a resolvable error
    k = 100.0
    errs = [abs(rk4_step(lambda s: -k * s, np.array([1.0]), h)[0] - math.exp(-k * h))
            for h in (1e-3, 5e-4, 2.5e-4)]
    assert errs[0] / errs[1] >= 15
    assert errs[1] / errs[2] >= 15


def test_nonfinite_derivative_raises():
    with pytest.raises(SimulationDiverged, match="component 1"):
        rk4_step(lambda s: np.array([0.0, np.inf]), np.zeros(2), 1e-3)


def test_nonfinite_state_raises():
    with pytest.raises(SimulationDiverged):
        rk4_step(lambda s: s, np.array([np.nan]), 1e-3)


def test_nonpositive_dt_rejected():
    with pytest.raises(ValueError):
        rk4_step(lambda s: s, np.zeros(1), 0.0)


class TestSimClock:
    def test_defaults(self):
        c = SimClock()
        assert c.steps_per_pwm == 100
        assert c.steps(2.0) == 2_000_000

    @pytest.mark.parametrize("kw", [dict(dt=0), dict(dt=1e-6, t_pwm=1.5e-6), dict(t=-1e-6), dict(t=0.5e-6)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SimClock(**kw)


def _series(n=1000, dt=1e-3, t0=0.0):
    return TimeSeries("x", dt, t0, np.arange(n, dtype=float))


class TestExtractWindow:
    def test_full_range_identity(self):
        s = _series()
        w = extract_window(s, s.t0, s.t_end)
        np.testing.assert_array_equal(w.samples, s.samples)
        assert w.t0 == s.t0

    def test_single_sample(self):
        s = _series()
        w = extract_window(s, 0.5 - s.dt, 0.5)
        assert len(w) == 1 and w.samples[0] == 499

    def test_sample_count_at_microsecond_rate(self):
        s = TimeSeries("i", 1e-6, 0.0, np.zeros(300_000))
        assert len(extract_window(s, 0.1, 0.2)) == 100_000

    def test_starts_at_or_after_t_start(self):
        s = _series()
        w = extract_window(s, 0.0105, 0.02)
        assert w.t0 == pytest.approx(0.011)

    @pytest.mark.parametrize("a,b", [(-0.1, 0.5), (0.5, 1.5), (0.5, 0.5)])
    def test_out_of_range(self, a, b):
        with pytest.raises(WindowRangeError):
            extract_window(_series(), a, b)

    @given(st.integers(0, 900), st.integers(1, 99))
    @settings(max_examples=50, deadline=None)
    def test_idempotent(self, k0, n):
        s = _series()
        a, b = k0 * s.dt, (k0 + n) * s.dt
        w1 = extract_window(s, a, b)
        w2 = extract_window(w1, a, b)
        np.testing.assert_array_equal(w1.samples, w2.samples)
        assert len(w1) == n


def test_csv_round_trip(tmp_path):
    s = TimeSeries("omega_m", 1e-4, 0.25, np.sin(np.arange(50) * 0.1) * 123.456789)
    p = tmp_path / "s.csv"
    s.to_csv(p)
    assert p.read_text().splitlines()[0] == "t,omega_m"
    back = read_timeseries_csv(p)
    assert back.label == "omega_m"
    assert back.dt == pytest.approx(s.dt, rel=1e-9)
    np.testing.assert_allclose(back.samples, s.samples, rtol=1e-11)
    np.testing.assert_allclose(back.times, s.times, rtol=1e-11)


def test_value_at_holds_previous_sample():
    s = _series(10, 0.1)
    assert s.value_at(0.35) == 3
    assert s.value_at(0.3) == 3
