"""Compiled fixed-step closed-loop loop: controller, modulator, inverter, machine.

Everything here is scalar numba code built from the per-module kernels so the
simulated loop and the public functions share one implementation.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from focsim.control import _current_loop, _speed_loop
from focsim.machines import _spmsm_rates, _spmsm_torque
from focsim.modulation import (
    ACTIVE_VECTORS,
    _carrier,
    _compare,
    _dpwm_refs,
    _hysteresis_leg,
    _svpwm_refs,
    _vsi,
)
from focsim.transforms import _clarke, _inverse_clarke, _inverse_park, _park

AVERAGE, HCC, SPWM, DPWM, SVPWM = 0, 1, 2, 3, 4
MODULATOR_CODES = {"average": AVERAGE, "hcc": HCC, "spwm": SPWM, "dpwm": DPWM, "svpwm": SVPWM}

TWO_PI = 2.0 * math.pi


@njit(cache=True)
def _rates_ab(i_d, i_q, w_m, theta, v_al, v_be, T_L, r_s, L, pp, lam, J, B):
    # stationary-frame voltage is held over the step, so it is rotated at the
    # stage angle
    v_d, v_q = _park(v_al, v_be, theta)
    return _spmsm_rates(i_d, i_q, w_m, v_d, v_q, T_L, r_s, L, pp, lam, J, B)


@njit(cache=True)
def _rk4(i_d, i_q, w_m, th, v_al, v_be, T_L, r_s, L, pp, lam, J, B, h):
    a1, b1, c1, d1 = _rates_ab(i_d, i_q, w_m, th, v_al, v_be, T_L, r_s, L, pp, lam, J, B)
    a2, b2, c2, d2 = _rates_ab(i_d + 0.5 * h * a1, i_q + 0.5 * h * b1, w_m + 0.5 * h * c1,
                               th + 0.5 * h * d1, v_al, v_be, T_L, r_s, L, pp, lam, J, B)
    a3, b3, c3, d3 = _rates_ab(i_d + 0.5 * h * a2, i_q + 0.5 * h * b2, w_m + 0.5 * h * c2,
                               th + 0.5 * h * d2, v_al, v_be, T_L, r_s, L, pp, lam, J, B)
    a4, b4, c4, d4 = _rates_ab(i_d + h * a3, i_q + h * b3, w_m + h * c3,
                               th + h * d3, v_al, v_be, T_L, r_s, L, pp, lam, J, B)
    s = h / 6.0
    return (i_d + s * (a1 + 2 * a2 + 2 * a3 + a4),
            i_q + s * (b1 + 2 * b2 + 2 * b3 + b4),
            w_m + s * (c1 + 2 * c2 + 2 * c3 + c4),
            th + s * (d1 + 2 * d2 + 2 * d3 + d4))


@njit(cache=True, nogil=True)
def run_loop(
    machine, v_dc, dt, n_steps, steps_per_pwm, ctrl_steps,
    speed_k, speed_v, load_k, load_v,
    gains, i_q_limit, v_limit, decouple, i_d_ref,
    code, band, delta, phi,
    decimation, n_gate, record_refs,
    x0, integ0,
    i_abc, i_ref, dec, gates, mod_refs,
):
    """Advance the drive ``n_steps`` steps of ``dt``.

    ``machine`` = (r_s, L, pole_pairs, lambda_m, J, B); ``gains`` = speed, d and
    q (K_p, K_i) pairs. Schedules are step indices with right-continuous
    values. Outputs are written into the preallocated arrays:

    * ``i_abc[k]`` phase currents at ``t = k*dt``;
    * ``i_ref[k]`` phase current references (when ``record_refs``);
    * ``dec[j]`` = (omega_m, T_e, i_d, i_q, v_d, v_q, i_q_ref) every
      ``decimation`` steps, with v_dq the applied dq voltage averaged over the
      following block;
    * ``gates``/``mod_refs`` for the first ``n_gate`` steps.

    Returns (status, step, x, integ, longest over-modulated stretch in control
    periods, voltage-limited control periods); status 1 means divergence.
    """
    r_s, L, pp, lam, J, B = machine[0], machine[1], machine[2], machine[3], machine[4], machine[5]
    kps, kis, kpd, kid, kpq, kiq = gains[0], gains[1], gains[2], gains[3], gains[4], gains[5]
    i_d, i_q, w_m, th = x0[0], x0[1], x0[2], x0[3]
    s_int, d_int, q_int = integ0[0], integ0[1], integ0[2]
    dt_ctrl = dt * ctrl_steps
    half = 0.5 * v_dc

    sp = 0
    lp = 0
    w_ref = speed_v[0]
    T_L = load_v[0]

    iq_ref = 0.0
    sa, sb, sc = 0, 0, 0
    ma, mb, mc = 0.0, 0.0, 0.0
    v_al_cmd, v_be_cmd = 0.0, 0.0
    ra, rb, rc = 0.0, 0.0, 0.0
    om_run, om_max, vlim_count = 0, 0, 0
    acc_vd, acc_vq = 0.0, 0.0
    n_dec = dec.shape[0]

    for k in range(n_steps):
        while sp + 1 < speed_k.shape[0] and speed_k[sp + 1] <= k:
            sp += 1
            w_ref = speed_v[sp]
        while lp + 1 < load_k.shape[0] and load_k[lp + 1] <= k:
            lp += 1
            T_L = load_v[lp]

        i_al, i_be = _inverse_park(i_d, i_q, th)
        ia, ib, ic = _inverse_clarke(i_al, i_be, 0.0)
        i_abc[k, 0] = ia
        i_abc[k, 1] = ib
        i_abc[k, 2] = ic

        if k % ctrl_steps == 0:
            iq_ref, s_int = _speed_loop(kps, kis, s_int, i_q_limit, w_ref, w_m, dt_ctrl)
            if code != HCC:
                v_d, v_q, d_int, q_int, limited = _current_loop(
                    kpd, kid, d_int, kpq, kiq, q_int, v_limit, decouple,
                    i_d_ref, iq_ref, i_d, i_q, pp * w_m, L, lam, dt_ctrl)
                if limited:
                    vlim_count += 1
                v_al_cmd, v_be_cmd = _inverse_park(v_d, v_q, th)
                over = False
                if code == SVPWM:
                    ma, mb, mc, scale = _svpwm_refs(v_al_cmd, v_be_cmd, v_dc, 1.0, ACTIVE_VECTORS)
                    over = scale < 1.0
                elif code == SPWM or code == DPWM:
                    va, vb, vc = _inverse_clarke(v_al_cmd, v_be_cmd, 0.0)
                    ma, mb, mc = va / half, vb / half, vc / half
                    if code == DPWM:
                        ma, mb, mc = _dpwm_refs(ma, mb, mc, math.atan2(v_be_cmd, v_al_cmd), delta, phi)
                    over = max(abs(ma), max(abs(mb), abs(mc))) > 1.0 + 1e-9
                if over:
                    om_run += 1
                    if om_run > om_max:
                        om_max = om_run
                else:
                    om_run = 0

        if code == HCC or record_refs:
            r_al, r_be = _inverse_park(i_d_ref, iq_ref, th)
            ra, rb, rc = _inverse_clarke(r_al, r_be, 0.0)
            if record_refs:
                i_ref[k, 0] = ra
                i_ref[k, 1] = rb
                i_ref[k, 2] = rc

        if code == AVERAGE:
            v_al, v_be = v_al_cmd, v_be_cmd
        else:
            if code == HCC:
                sa = _hysteresis_leg(ra - ia, band, sa)
                sb = _hysteresis_leg(rb - ib, band, sb)
                sc = _hysteresis_leg(rc - ic, band, sc)
            else:
                # carrier sampled at the centre of the step it governs
                car = _carrier(((k % steps_per_pwm) + 0.5) * dt, steps_per_pwm * dt)
                sa = _compare(ma, car)
                sb = _compare(mb, car)
                sc = _compare(mc, car)
            pa, pb, pc = _vsi(sa, sb, sc, v_dc)
            v_al, v_be, _z = _clarke(pa, pb, pc)

        if k < n_gate:
            gates[k, 0] = sa
            gates[k, 1] = sb
            gates[k, 2] = sc
            mod_refs[k, 0] = ma
            mod_refs[k, 1] = mb
            mod_refs[k, 2] = mc

        vd_now, vq_now = _park(v_al, v_be, th)
        acc_vd += vd_now
        acc_vq += vq_now
        if k % decimation == 0:
            j = k // decimation
            if j < n_dec:
                dec[j, 0] = w_m
                dec[j, 1] = _spmsm_torque(i_d, i_q, L, pp, lam)
                dec[j, 2] = i_d
                dec[j, 3] = i_q
                dec[j, 6] = iq_ref
        if (k + 1) % decimation == 0 or k == n_steps - 1:
            j = k // decimation
            if j < n_dec:
                cnt = k % decimation + 1
                dec[j, 4] = acc_vd / cnt
                dec[j, 5] = acc_vq / cnt
            acc_vd, acc_vq = 0.0, 0.0

        n_id, n_iq, n_w, n_th = _rk4(i_d, i_q, w_m, th, v_al, v_be, T_L, r_s, L, pp, lam, J, B, dt)
        if not (math.isfinite(n_id) and math.isfinite(n_iq) and math.isfinite(n_w) and math.isfinite(n_th)):
            x = np.array([i_d, i_q, w_m, th])
            return 1, k, x, np.array([s_int, d_int, q_int]), om_max, vlim_count
        i_d, i_q, w_m = n_id, n_iq, n_w
        th = n_th % TWO_PI

    x = np.array([i_d, i_q, w_m, th])
    return 0, n_steps, x, np.array([s_int, d_int, q_int]), om_max, vlim_count
