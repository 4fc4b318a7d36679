import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from focsim.control import (
    ConfigurationError,
    FocConfig,
    FocState,
    PiController,
    compute_default_gains,
    current_loop_step,
    pi_step,
    speed_loop_step,
)
from focsim.machines import SpmsmParams
from focsim.transforms import DqVector

P = SpmsmParams()


class TestPi:
    def test_proportional(self):
        u, _ = pi_step(PiController(K_p=2.0, K_i=0.0), 1.5, 1e-3)
        assert u == 3.0

    def test_integral_of_constant_error(self):
        c = PiController(K_p=0.0, K_i=10.0)
        for _ in range(1000):
            u, c = pi_step(c, 1.0, 1e-4)
        assert u == pytest.approx(1.0, rel=1e-12)

    def test_clamp_freezes_integrator(self):
        c = PiController(K_p=1.0, K_i=5.0, out_min=-1.0, out_max=1.0, integrator=0.3)
        u, c2 = pi_step(c, 1e6, 1e-3)
        assert u == 1.0
        assert c2.integrator == 0.3

    def test_integrator_unwinds_against_saturation(self):
        c = PiController(K_p=1.0, K_i=100.0, out_min=-1.0, out_max=1.0, integrator=0.9)
        u, c2 = pi_step(c, -0.5, 1e-3)
        assert c2.integrator == pytest.approx(0.85)
        assert u == pytest.approx(0.35)

    def test_invalid(self):
        with pytest.raises(ConfigurationError):
            PiController(out_min=1.0, out_max=1.0)
        with pytest.raises(ConfigurationError):
            PiController(integrator=math.nan)
        with pytest.raises(ValueError):
            pi_step(PiController(), 1.0, 0.0)

    @given(
        st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=200),
        st.floats(0.0, 10.0),
        st.floats(0.0, 1e3),
    )
    @settings(max_examples=100)
    def test_anti_windup_bounds(self, errors, kp, ki):
        lo, hi, dt = -2.0, 3.0, 1e-3
        c = PiController(kp, ki, lo, hi)
        e_max = max(abs(e) for e in errors)
        for e in errors:
            u, c = pi_step(c, e, dt)
            assert lo <= u <= hi
            assert abs(c.integrator) <= (hi - lo) + abs(ki * e_max * dt) + max(abs(lo), abs(hi))


def _state(**kw):
    cfg = compute_default_gains(P, **kw)
    return cfg, FocState.from_config(cfg, v_limit=200.0)


class TestSpeedLoop:
    def test_zero_error_gives_integrator(self):
        cfg = FocConfig(speed_pi=PiController(5.0, 10.0, integrator=2.5))
        assert speed_loop_step(FocState.from_config(cfg), 100.0, 100.0, 1e-4) == 2.5

    def test_zero_gains(self):
        assert speed_loop_step(FocState.from_config(FocConfig()), 300.0, 0.0, 1e-4) == 0.0

    def test_torque_limit(self):
        cfg = FocConfig(speed_pi=PiController(1.0, 0.0), i_q_limit=10.0)
        assert speed_loop_step(FocState.from_config(cfg), 30.0, 0.0, 1e-4) == 10.0
        assert speed_loop_step(FocState.from_config(cfg), -30.0, 0.0, 1e-4) == -10.0


class TestCurrentLoop:
    def test_feedforward_only(self):
        cfg = FocConfig(id_pi=PiController(1.0, 1.0, integrator=1.5), iq_pi=PiController(1.0, 1.0, integrator=-2.0))
        st_ = FocState.from_config(cfg, v_limit=1e3)
        w_e = 800.0
        v = current_loop_step(st_, DqVector(0, 4), DqVector(0, 4), w_e, P, 1e-4)
        assert v.d == pytest.approx(1.5 - w_e * P.L * 4)
        assert v.q == pytest.approx(-2.0 + w_e * P.lambda_m)

    def test_disabled(self):
        cfg = FocConfig(decoupling_enabled=False)
        v = current_loop_step(FocState.from_config(cfg), DqVector(3, 4), DqVector(0, 1), 900.0, P, 1e-4)
        assert (v.d, v.q) == (0.0, 0.0)

    def test_angle_preserving_limit(self):
        lim = 100.0
        ang = math.radians(30)
        k = 2 * lim  # pure proportional demand of 2 * v_limit at 30 degrees
        cfg = FocConfig(id_pi=PiController(1.0, 0.0), iq_pi=PiController(1.0, 0.0), decoupling_enabled=False)
        st_ = FocState.from_config(cfg, v_limit=lim)
        v = current_loop_step(st_, DqVector(k * math.cos(ang), k * math.sin(ang)), DqVector(0, 0), 0.0, P, 1e-4)
        assert math.hypot(v.d, v.q) == pytest.approx(lim)
        assert math.atan2(v.q, v.d) == pytest.approx(ang)

    def test_integrators_hold_while_limited(self):
        cfg = FocConfig(id_pi=PiController(1.0, 1e3), iq_pi=PiController(1.0, 1e3), decoupling_enabled=False)
        st_ = FocState.from_config(cfg, v_limit=10.0)
        for _ in range(100):
            current_loop_step(st_, DqVector(0, 500), DqVector(0, 0), 0.0, P, 1e-4)
        assert st_.q_integ == 0.0


class TestGains:
    def test_values(self):
        cfg = compute_default_gains(P, 1000.0, 50.0)
        assert cfg.iq_pi.K_p == pytest.approx(5.247, abs=1e-3)
        assert cfg.iq_pi.K_i == pytest.approx(4241.2, abs=0.05)
        assert cfg.id_pi == cfg.iq_pi
        w = 2 * math.pi * 50
        assert cfg.speed_pi.K_p == pytest.approx(P.J * w / (1.5 * 4 * 0.11))
        assert cfg.speed_pi.K_i == pytest.approx(cfg.speed_pi.K_p * w / 5)

    def test_zero_bandwidth(self):
        cfg = compute_default_gains(P, 0.0, 0.0)
        assert cfg.iq_pi.K_p == cfg.iq_pi.K_i == cfg.speed_pi.K_p == 0

    def test_linear_in_bandwidth(self):
        a = compute_default_gains(P, 400.0, 10.0)
        b = compute_default_gains(P, 800.0, 10.0)
        assert b.iq_pi.K_p == pytest.approx(2 * a.iq_pi.K_p)
        assert b.iq_pi.K_i == pytest.approx(2 * a.iq_pi.K_i)

    @pytest.mark.parametrize("f_cc,f_sc", [(1000.0, 200.0), (2000.0, 50.0), (-1.0, 0.0)])
    def test_ordering_enforced(self, f_cc, f_sc):
        with pytest.raises(ConfigurationError):
            compute_default_gains(P, f_cc, f_sc, t_pwm=100e-6)

    def test_overrides(self):
        assert compute_default_gains(P, i_q_limit=25.0).i_q_limit == 25.0


def test_current_loop_is_first_order():
    """Locked rotor, ideal inverter: i_q follows 1 - exp(-w_cc t)."""
    cfg = compute_default_gains(P, 1000.0, 50.0)
    st_ = FocState.from_config(cfg, v_limit=400 / math.sqrt(3))
    w_cc = 2 * math.pi * 1000
    dt = 1e-6
    i = np.zeros(2)
    for k in range(1, 1001):
        v = current_loop_step(st_, DqVector(0, 10), DqVector(*i), 0.0, P, dt)
        # exact zero-order-hold response of the RL branch
        a = math.exp(-P.r_s * dt / P.L)
        i = a * i + (1 - a) * np.array([v.d, v.q]) / P.r_s
        if k in (200, 500, 1000):
            assert i[1] == pytest.approx(10 * (1 - math.exp(-w_cc * k * dt)), rel=0.1, abs=0.05)


def test_speed_error_vanishes():
    from focsim.harness import default_scenario, run_scenario

    base = default_scenario()
    iq0 = 5.0 / base.machine.torque_constant
    ctl = replace(base.control, speed_pi=replace(base.control.speed_pi, integrator=iq0))
    spec = replace(base, control=ctl, duration=0.2, speed_schedule=((0.0, 100.0),),
                   load_schedule=((0.0, 5.0),), thd_windows=(), decimation=10)
    rep = run_scenario(spec, "average", x0=[0.0, iq0, 95.0, 0.0])
    w = rep.traces["omega_m"]
    # the PI zero at w_sc/5 sets the slowest mode (time constant ~5/w_sc)
    t_check = 25 / (2 * math.pi * 50)
    assert np.max(np.abs(w.samples[w.times >= t_check] - 100.0)) < 0.1
