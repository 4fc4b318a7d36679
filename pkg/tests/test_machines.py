import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from focsim.machines import (
    ImParams,
    SpmsmParams,
    SpmsmState,
    im_output,
    im_slip,
    im_solve_circuit,
    im_torque_slip_curve,
    spmsm_derivatives,
    spmsm_torque,
    torque_slip_to_csv,
)
from focsim.simcore import rk4_step
from focsim.transforms import DqVector

P = SpmsmParams()


def cramer(V, w, S, p):
    """Independent 2x2 solve by Cramer's rule from the two loop equations."""
    zm = 1j * w * p.L_m
    a, b = p.R + 1j * w * p.L_ls + zm, zm
    c, d = zm, p.R_r / S + 1j * w * p.L_lr + zm
    det = a * d - b * c
    return (V * d) / det, (-c * V) / det


def random_im(rng):
    return ImParams(*rng.uniform([0.05, 0.05, 1e-4, 1e-4, 5e-3], [5, 5, 1e-2, 1e-2, 0.5]), pole_pairs=2)


class TestSpmsm:
    def test_defaults(self):
        assert (P.r_s, P.L, P.pole_pairs, P.lambda_m, P.J) == (0.675, 0.000835, 4, 0.11, 0.01)

    def test_origin_is_equilibrium(self):
        np.testing.assert_array_equal(spmsm_derivatives(SpmsmState(0, 0, 0, 0), DqVector(0, 0), 0.0, P), 0)

    def test_steady_state_voltages(self):
        i_q, w_m = 12.0, 250.0
        w_e = P.pole_pairs * w_m
        v = DqVector(-w_e * P.L * i_q, P.r_s * i_q + w_e * P.lambda_m)
        r = spmsm_derivatives(SpmsmState(0, i_q, w_m, 1.0), v, 0.0, SpmsmParams(B=0.0))
        assert abs(r[0]) < 1e-9 and abs(r[1]) < 1e-9
        assert r[3] == pytest.approx(w_e)

    def test_balancing_current(self):
        p = SpmsmParams(B=0.0)
        i_q = 5.0 / (1.5 * 4 * 0.11)
        assert i_q == pytest.approx(7.5758, abs=1e-4)
        assert spmsm_torque(DqVector(0, i_q), p) == pytest.approx(5.0)
        r = spmsm_derivatives(SpmsmState(0, i_q, 0, 0), DqVector(0, 0), 5.0, p)
        assert abs(r[2]) < 1e-12

    def test_torque_examples(self):
        assert spmsm_torque(DqVector(3.0, 0.0), P) == 0
        assert spmsm_torque(DqVector(0, 10), P) == pytest.approx(6.6)
        assert spmsm_torque(DqVector(5, 5), SpmsmParams(L=0.3)) == pytest.approx(spmsm_torque(DqVector(0, 5), P))

    @given(st.floats(-100, 100), st.floats(-100, 100), st.floats(-3, 3))
    def test_torque_linear_in_iq(self, i_d, i_q, k):
        t = spmsm_torque(DqVector(i_d, i_q), P)
        assert spmsm_torque(DqVector(i_d, k * i_q), P) == pytest.approx(k * t, abs=1e-9)

    def test_state_wraps_angle(self):
        s = SpmsmState(0, 0, 0, 7.0)
        assert 0 <= s.theta_e < 2 * math.pi
        assert s.theta_e == pytest.approx(7.0 - 2 * math.pi)

    @pytest.mark.parametrize("kw", [dict(r_s=0), dict(L=-1), dict(pole_pairs=0), dict(J=0), dict(B=-0.1)])
    def test_invalid_params(self, kw):
        with pytest.raises(ValueError):
            SpmsmParams(**kw)

    def test_energy_bookkeeping(self):
        # with the amplitude-invariant dq scaling the stored magnetic energy is
        # (3/2) * 0.5 * L * |i|^2, matching the 3/2 on the power terms
        p = SpmsmParams(B=0.0)
        v = DqVector(-20.0, 60.0)
        x = np.array([1.0, 5.0, 50.0, 0.3])
        dt = 1e-6

        def energy(s):
            return 0.75 * p.L * (s[0] ** 2 + s[1] ** 2) + 0.5 * p.J * s[2] ** 2

        for _ in range(50):
            f = lambda s: spmsm_derivatives(SpmsmState.from_array(s), v, 0.0, p)
            x_new = rk4_step(f, x, dt)
            mid = 0.5 * (x + x_new)
            p_in = 1.5 * (v.d * mid[0] + v.q * mid[1])
            p_loss = 1.5 * p.r_s * (mid[0] ** 2 + mid[1] ** 2)
            assert (energy(x_new) - energy(x)) / dt == pytest.approx(p_in - p_loss, abs=1e-3 * abs(p_in))
            x = x_new

    def test_unforced_state_decays(self):
        p = SpmsmParams(B=0.01)
        x = np.array([3.0, -4.0, 80.0, 0.0])

        def energy(s):
            return 0.75 * p.L * (s[0] ** 2 + s[1] ** 2) + 0.5 * p.J * s[2] ** 2

        for _ in range(200):
            x_new = rk4_step(lambda s: spmsm_derivatives(SpmsmState.from_array(s), DqVector(0, 0), 0.0, p), x, 1e-5)
            assert energy(x_new) < energy(x)
            x = x_new


class TestInductionMotor:
    def test_slip_examples(self):
        assert im_slip(100.0, 0.0, 2) == 1
        assert im_slip(100.0, 50.0, 2) == 0
        assert im_slip(2 * math.pi * 50, 150.0, 2) == pytest.approx(0.04507, abs=1e-5)
        with pytest.raises(ZeroDivisionError):
            im_slip(0.0, 10.0, 2)

    def test_zero_voltage(self):
        I, I_r = im_solve_circuit(0.0, 314.0, 0.05, random_im(np.random.default_rng(0)))
        assert I == 0 and I_r == 0

    def test_matches_cramer_and_has_small_residual(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            p = random_im(rng)
            S = float(rng.uniform(1e-3, 1.0))
            w = float(rng.uniform(10, 1000))
            V = complex(*rng.uniform(-400, 400, 2))
            I, I_r = im_solve_circuit(V, w, S, p)
            Ic, Irc = cramer(V, w, S, p)
            assert abs(I - Ic) <= 1e-10 * abs(Ic)
            assert abs(I_r - Irc) <= 1e-10 * abs(Irc)
            zm = 1j * w * p.L_m
            r1 = (p.R + 1j * w * p.L_ls + zm) * I + zm * I_r - V
            r2 = zm * I + (p.R_r / S + 1j * w * p.L_lr + zm) * I_r
            assert max(abs(r1), abs(r2)) < 1e-10 * abs(V)

    @pytest.mark.parametrize("S", [0.0, -0.1, 1.5])
    def test_slip_outside_motoring_range(self, S):
        with pytest.raises(ValueError):
            im_solve_circuit(230.0, 314.0, S, random_im(np.random.default_rng(1)))
        with pytest.raises(ValueError):
            im_output(1 + 1j, S, 0.5, 314.0)

    def test_output_examples(self):
        assert im_output(3 + 4j, 1.0, 0.5, 314.0) == (0.0, 0.0)
        P_out, T_e = im_output(10.0, 0.05, 0.5, 314.0)
        assert P_out == pytest.approx(2850.0)
        assert T_e * 314.0 == pytest.approx(P_out, rel=1e-15)

    def test_curve(self, tmp_path):
        p = ImParams(0.5, 0.4, 0.002, 0.002, 0.08)
        w = 2 * math.pi * 50
        (row,) = im_torque_slip_curve(p, 230.0, w, [1.0])
        assert row.T_e == 0
        grid = np.linspace(0.01, 1.0, 100)
        rows = im_torque_slip_curve(p, 230.0, w, grid)
        assert len(rows) == 100
        assert [r.S for r in rows] == list(grid)
        for r in rows[::17]:
            I, I_r = im_solve_circuit(230.0, w, r.S, p)
            assert (r.P_out, r.T_e) == im_output(I_r, r.S, p.R_r, w)
            assert r.I_mag == abs(I)
        _, Irc = cramer(230.0, w, rows[0].S, p)
        assert rows[0].P_out == pytest.approx(3 * abs(Irc) ** 2 * p.R_r * (1 - rows[0].S) / rows[0].S, rel=1e-10)
        torque_slip_to_csv(rows, tmp_path / "ts.csv")
        lines = (tmp_path / "ts.csv").read_text().splitlines()
        assert lines[0] == "S,Te,Pout,I_mag" and len(lines) == 101

    def test_curve_reports_bad_slip(self):
        with pytest.raises(ValueError, match="S=0"):
            im_torque_slip_curve(ImParams(0.5, 0.4, 0.002, 0.002, 0.08), 230.0, 314.0, [0.5, 0.0])
