"""PI regulators and the speed/current cascade of the vector controller."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from numba import njit

from focsim.machines import SpmsmParams
from focsim.transforms import DqVector


class ConfigurationError(ValueError):
    pass


@njit(cache=True)
def _pi_update(kp, ki, integ, lo, hi, err, dt):
    """One PI step with conditional integration; returns (output, integrator)."""
    cand = integ + ki * err * dt
    u = kp * err + cand
    if (u > hi and ki * err > 0.0) or (u < lo and ki * err < 0.0):
        # integrating would drive further into saturation
        cand = integ
        u = kp * err + integ
    if cand > hi:
        cand = hi
    elif cand < lo:
        cand = lo
    if u > hi:
        u = hi
    elif u < lo:
        u = lo
    return u, cand


@dataclass(frozen=True)
class PiController:
    K_p: float = 0.0
    K_i: float = 0.0
    out_min: float = -math.inf
    out_max: float = math.inf
    integrator: float = 0.0

    def __post_init__(self):
        if not self.out_min < self.out_max:
            raise ConfigurationError(f"out_min {self.out_min} must be below out_max {self.out_max}")
        if not math.isfinite(self.integrator):
            raise ConfigurationError("integrator must be finite")

    def with_limits(self, limit: float) -> "PiController":
        return replace(self, out_min=-limit, out_max=limit)


def pi_step(c: PiController, error: float, dt: float) -> tuple[float, PiController]:
    """Advance the controller by ``dt``; forward-Euler integrator.

    The output is clamped to ``[out_min, out_max]``. While clamped, the
    integrator is not advanced in the direction of the saturation, and it is
    itself never stored outside the output range.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    u, integ = _pi_update(c.K_p, c.K_i, c.integrator, c.out_min, c.out_max, float(error), float(dt))
    return u, replace(c, integrator=integ)


@dataclass(frozen=True)
class FocConfig:
    """Cascade settings.

    ``v_limit=None`` and ``control_period=None`` let the simulation pick the
    per-modulator defaults (linear-range voltage limit; PWM period for
    carrier methods, simulation step for hysteresis control).
    """

    speed_pi: PiController = field(default_factory=PiController)
    id_pi: PiController = field(default_factory=PiController)
    iq_pi: PiController = field(default_factory=PiController)
    i_d_ref: float = 0.0
    i_q_limit: float = 100.0
    v_limit: float | None = None
    decoupling_enabled: bool = True
    control_period: float | None = None

    def __post_init__(self):
        if not self.i_q_limit > 0:
            raise ConfigurationError("i_q_limit must be positive")
        if self.v_limit is not None and not self.v_limit > 0:
            raise ConfigurationError("v_limit must be positive")
        if self.control_period is not None and not self.control_period > 0:
            raise ConfigurationError("control_period must be positive")


@dataclass
class FocState:
    """Mutable controller state for one run."""

    cfg: FocConfig
    speed_integ: float = 0.0
    d_integ: float = 0.0
    q_integ: float = 0.0
    v_limit: float = math.inf

    @classmethod
    def from_config(cls, cfg: FocConfig, v_limit: float | None = None) -> "FocState":
        vl = v_limit if v_limit is not None else cfg.v_limit
        return cls(cfg, cfg.speed_pi.integrator, cfg.id_pi.integrator, cfg.iq_pi.integrator,
                   math.inf if vl is None else vl)


@njit(cache=True)
def _speed_loop(kp, ki, integ, i_q_limit, omega_ref, omega_m, dt):
    return _pi_update(kp, ki, integ, -i_q_limit, i_q_limit, omega_ref - omega_m, dt)


@njit(cache=True)
def _current_loop(kpd, kid, integ_d, kpq, kiq, integ_q, v_limit, decouple,
                  i_d_ref, i_q_ref, i_d, i_q, omega_e, L, lambda_m, dt):
    """d/q current PIs with decoupling feedforward and an angle-preserving
    magnitude limit. Returns (v_d, v_q, integ_d, integ_q, limited)."""
    e_d = i_d_ref - i_d
    e_q = i_q_ref - i_q
    # axes are limited together below; a per-axis clamp would bend the angle
    pd, new_d = _pi_update(kpd, kid, integ_d, -math.inf, math.inf, e_d, dt)
    pq, new_q = _pi_update(kpq, kiq, integ_q, -math.inf, math.inf, e_q, dt)
    new_d = min(max(new_d, -v_limit), v_limit)
    new_q = min(max(new_q, -v_limit), v_limit)
    ff_d = 0.0
    ff_q = 0.0
    if decouple:
        ff_d = -omega_e * L * i_q
        ff_q = omega_e * L * i_d + omega_e * lambda_m
    v_d = pd + ff_d
    v_q = pq + ff_q
    mag = math.hypot(v_d, v_q)
    limited = False
    if mag > v_limit:
        limited = True
        # vector-level conditional integration: keep the old integrators if the
        # new ones would have increased the demanded magnitude
        old_d = kpd * e_d + integ_d + ff_d
        old_q = kpq * e_q + integ_q + ff_q
        if math.hypot(kpd * e_d + new_d + ff_d, kpq * e_q + new_q + ff_q) > math.hypot(old_d, old_q):
            new_d = integ_d
            new_q = integ_q
        scale = v_limit / mag
        v_d *= scale
        v_q *= scale
    return v_d, v_q, new_d, new_q, limited


def speed_loop_step(st: FocState, omega_ref: float, omega_m: float, dt: float) -> float:
    """Speed regulator: returns the q-axis current reference (clamped to +-i_q_limit)."""
    c = st.cfg.speed_pi
    i_q_ref, st.speed_integ = _speed_loop(c.K_p, c.K_i, st.speed_integ, st.cfg.i_q_limit,
                                          float(omega_ref), float(omega_m), float(dt))
    return i_q_ref


def current_loop_step(st: FocState, i_dq_ref: DqVector, i_dq: DqVector, omega_e: float,
                      params: SpmsmParams, dt: float) -> DqVector:
    """Current regulators: returns the dq voltage reference."""
    cfg = st.cfg
    v_d, v_q, st.d_integ, st.q_integ, _ = _current_loop(
        cfg.id_pi.K_p, cfg.id_pi.K_i, st.d_integ, cfg.iq_pi.K_p, cfg.iq_pi.K_i, st.q_integ,
        st.v_limit, cfg.decoupling_enabled,
        float(i_dq_ref.d), float(i_dq_ref.q), float(i_dq.d), float(i_dq.q),
        float(omega_e), params.L, params.lambda_m, float(dt),
    )
    return DqVector(v_d, v_q)


def compute_default_gains(params: SpmsmParams, f_cc: float = 1000.0, f_sc: float = 50.0,
                          t_pwm: float = 100e-6, **overrides) -> FocConfig:
    """PI gains from loop bandwidths.

    Current loops cancel the stator pole (``K_i/K_p = r_s/L``), giving a
    first-order closed loop at ``2*pi*f_cc``. The speed loop crosses over at
    ``2*pi*f_sc`` with its zero a factor 5 below.
    """
    if f_cc < 0 or f_sc < 0:
        raise ConfigurationError("bandwidths must be non-negative")
    if f_sc > f_cc / 10:
        raise ConfigurationError(f"speed bandwidth {f_sc} Hz exceeds a tenth of current bandwidth {f_cc} Hz")
    if f_cc > 1.0 / (10.0 * t_pwm):
        raise ConfigurationError(f"current bandwidth {f_cc} Hz exceeds a tenth of the PWM frequency")
    w_cc = 2.0 * math.pi * f_cc
    w_sc = 2.0 * math.pi * f_sc
    kp_c = params.L * w_cc
    ki_c = params.r_s * w_cc
    kp_s = params.J * w_sc / params.torque_constant
    ki_s = kp_s * w_sc / 5.0
    return FocConfig(
        speed_pi=PiController(kp_s, ki_s),
        id_pi=PiController(kp_c, ki_c),
        iq_pi=PiController(kp_c, ki_c),
        **overrides,
    )
