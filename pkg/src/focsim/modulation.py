"""Inverter switching techniques and the ideal two-level voltage-source inverter.

Carrier-based methods work on references normalised to half the DC-link
voltage (``v / (V_dc/2)``, linear range ``[-1, 1]``) and compare them with a
shared symmetric triangular carrier. SVPWM is expressed through its phase
duties and realised on the same carrier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from focsim.transforms import SQRT3, AbcVector, AlphaBetaVector, _clarke

PI_3 = math.pi / 3.0

# upper-leg states of the six active vectors V1..V6
ACTIVE_VECTORS = np.array(
    [[1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 1, 1], [0, 0, 1], [1, 0, 1]], dtype=np.int64
)


class OverModulationError(ValueError):
    """Reference outside the inverter's linear range.

    ``scale`` is the factor the reference must be multiplied by to land on the
    linear-range boundary.
    """

    def __init__(self, message: str, scale: float):
        super().__init__(message)
        self.scale = scale


@dataclass(frozen=True)
class SwitchState:
    s_a: int
    s_b: int
    s_c: int

    def __post_init__(self):
        for s in (self.s_a, self.s_b, self.s_c):
            if s not in (0, 1):
                raise ValueError(f"switch states are 0 (lower on) or 1 (upper on), got {s}")

    def __iter__(self):
        return iter((self.s_a, self.s_b, self.s_c))


V0 = SwitchState(0, 0, 0)
V7 = SwitchState(1, 1, 1)


@dataclass(frozen=True)
class HysteresisConfig:
    """Band in amperes. The 3 A default gives the benchmark drive an average
    leg switching frequency close to the 10 kHz carrier of the PWM methods."""

    band: float = 3.0

    def __post_init__(self):
        if not self.band > 0:
            raise ValueError("hysteresis band must be positive")


@dataclass(frozen=True)
class CarrierConfig:
    frequency: float = 10e3
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.frequency > 0:
            raise ValueError("carrier frequency must be positive")

    @property
    def period(self) -> float:
        return 1.0 / self.frequency


@dataclass(frozen=True)
class DpwmConfig:
    delta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.delta) and math.isfinite(self.phi)):
            raise ValueError("delta and phi must be finite")


@dataclass(frozen=True)
class SvpwmTimes:
    T1: float
    T2: float
    T0: float
    sector: int

    @property
    def T_s(self) -> float:
        return self.T1 + self.T2 + self.T0


# --- scalar kernels -----------------------------------------------------------


@njit(cache=True)
def _hysteresis_leg(err, band, prev):
    if err >= band:
        return 1
    if err <= -band:
        return 0
    return prev


@njit(cache=True)
def _carrier(t, period):
    phase = t / period
    phase -= math.floor(phase)
    if phase < 0.5:
        return -1.0 + 4.0 * phase
    return 3.0 - 4.0 * phase


@njit(cache=True)
def _compare(v, carrier):
    return 1 if v > carrier else 0


@njit(cache=True)
def _dpwm_alpha(omega_t, delta, phi):
    return 1.0 if math.cos(3.0 * (omega_t + delta + phi)) >= 0.0 else 0.0


@njit(cache=True)
def _dpwm_refs(va, vb, vc, omega_t, delta, phi):
    alpha = _dpwm_alpha(omega_t, delta, phi)
    vmax = max(va, max(vb, vc))
    vmin = min(va, min(vb, vc))
    vzs = alpha * (1.0 - vmax) + (1.0 - alpha) * (-1.0 - vmin)
    return va + vzs, vb + vzs, vc + vzs


@njit(cache=True)
def _minmax_refs(va, vb, vc):
    vzs = -0.5 * (max(va, max(vb, vc)) + min(va, min(vb, vc)))
    return va + vzs, vb + vzs, vc + vzs


@njit(cache=True)
def _svpwm_sector(alpha, beta):
    if alpha == 0.0 and beta == 0.0:
        return 1
    ang = math.atan2(beta, alpha)
    if ang < 0.0:
        ang += 2.0 * math.pi
    n = 1 + int(math.floor(ang / PI_3))
    if n > 6:
        n = 6
    return n


@njit(cache=True)
def _svpwm_times(alpha, beta, v_dc, t_s, n):
    """Dwell times (T1 on V_n, T2 on V_n+1, T0) and the needed rescale (1 if linear)."""
    k = SQRT3 * t_s / v_dc
    t1 = k * (math.sin(n * PI_3) * alpha - math.cos(n * PI_3) * beta)
    t2 = k * (math.cos((n - 1) * PI_3) * beta - math.sin((n - 1) * PI_3) * alpha)
    # polar form: t1 = k|v|sin(n*pi/3 - th), t2 = k|v|sin(th - (n-1)*pi/3)
    if t1 < 0.0:
        t1 = 0.0
    if t2 < 0.0:
        t2 = 0.0
    active = t1 + t2
    scale = 1.0
    if active > t_s * (1.0 + 1e-12):
        scale = t_s / active
    t0 = t_s - active
    if t0 < 0.0:
        t0 = 0.0
    return t1, t2, t0, scale


@njit(cache=True)
def _svpwm_duties(t1, t2, t0, n, t_s, vectors):
    i1 = n - 1
    i2 = n % 6
    da = (t1 * vectors[i1, 0] + t2 * vectors[i2, 0] + 0.5 * t0) / t_s
    db = (t1 * vectors[i1, 1] + t2 * vectors[i2, 1] + 0.5 * t0) / t_s
    dc = (t1 * vectors[i1, 2] + t2 * vectors[i2, 2] + 0.5 * t0) / t_s
    return da, db, dc


@njit(cache=True)
def _svpwm_refs(alpha, beta, v_dc, t_s, vectors):
    """Carrier-comparison references (2d - 1) for a volt-valued alpha-beta vector."""
    n = _svpwm_sector(alpha, beta)
    t1, t2, t0, scale = _svpwm_times(alpha, beta, v_dc, t_s, n)
    if scale < 1.0:
        t1, t2, t0, _ = _svpwm_times(alpha * scale, beta * scale, v_dc, t_s, n)
    da, db, dc = _svpwm_duties(t1, t2, t0, n, t_s, vectors)
    return 2.0 * da - 1.0, 2.0 * db - 1.0, 2.0 * dc - 1.0, scale


@njit(cache=True)
def _vsi(sa, sb, sc, v_dc):
    third = v_dc / 3.0
    return (third * (2 * sa - sb - sc), third * (2 * sb - sa - sc), third * (2 * sc - sa - sb))


# --- public API ---------------------------------------------------------------


def hysteresis_step(i_ref: AbcVector, i_meas: AbcVector, H: float, prev: SwitchState) -> SwitchState:
    """Per-phase bang-bang comparator with band ``H``.

    Error at or above ``+H`` turns the upper switch on, at or below ``-H`` the
    lower switch; inside the band the leg keeps its previous state.
    """
    if not H > 0:
        raise ValueError("H must be positive")
    return SwitchState(
        _hysteresis_leg(i_ref.a - i_meas.a, H, prev.s_a),
        _hysteresis_leg(i_ref.b - i_meas.b, H, prev.s_b),
        _hysteresis_leg(i_ref.c - i_meas.c, H, prev.s_c),
    )


def triangular_carrier(t: float, cfg: CarrierConfig) -> float:
    """-1 at the period start, +1 at half period."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return cfg.amplitude * _carrier(float(t), cfg.period)


def spwm_step(v_ref_norm: AbcVector, carrier: float) -> SwitchState:
    return SwitchState(_compare(v_ref_norm.a, carrier), _compare(v_ref_norm.b, carrier),
                       _compare(v_ref_norm.c, carrier))


def dpwm_alpha(omega_t: float, cfg: DpwmConfig) -> float:
    """Clamp selector: 1 clamps the largest phase to +1, 0 the smallest to -1."""
    return _dpwm_alpha(float(omega_t), cfg.delta, cfg.phi)


def dpwm_modified_refs(v_ref_norm: AbcVector, omega_t: float, cfg: DpwmConfig = DpwmConfig()) -> AbcVector:
    """Inject the discontinuous zero-sequence signal that clamps one phase to a rail.

    ``omega_t`` is the angle of the reference voltage vector.
    """
    return AbcVector(*_dpwm_refs(float(v_ref_norm.a), float(v_ref_norm.b), float(v_ref_norm.c),
                                 float(omega_t), cfg.delta, cfg.phi))


def svpwm_sector(v: AlphaBetaVector) -> int:
    return _svpwm_sector(float(v.alpha), float(v.beta))


def svpwm_times(v: AlphaBetaVector, V_dc: float, T_s: float, n: int | None = None) -> SvpwmTimes:
    """Dwell times of the two adjacent active vectors and the zero vectors.

    Raises :class:`OverModulationError` when ``v`` lies outside the hexagon.
    """
    if not V_dc > 0:
        raise ValueError("V_dc must be positive")
    if n is None:
        n = svpwm_sector(v)
    if not 1 <= n <= 6:
        raise ValueError(f"sector must be 1..6, got {n}")
    t1, t2, t0, scale = _svpwm_times(float(v.alpha), float(v.beta), float(V_dc), float(T_s), int(n))
    if scale < 1.0:
        raise OverModulationError(
            f"reference |v|={math.hypot(v.alpha, v.beta):.6g} V outside the hexagon for V_dc={V_dc}", scale
        )
    # on a grid of ulp(T_s) every partial sum is exact, so T1 + T2 + T0 == T_s
    q = math.ulp(T_s)
    t1 = round(t1 / q) * q
    t2 = round(t2 / q) * q
    t0 = T_s - t1 - t2
    if t0 < 0.0:
        t1, t0 = T_s - t2, 0.0
    return SvpwmTimes(t1, t2, t0, int(n))


def svpwm_duties(t: SvpwmTimes) -> tuple[float, float, float]:
    """Per-phase duty of the symmetric seven-segment sequence."""
    return _svpwm_duties(t.T1, t.T2, t.T0, t.sector, t.T_s, ACTIVE_VECTORS)


def svpwm_segments(t: SvpwmTimes) -> list[tuple[SwitchState, float]]:
    """The seven (state, duration) segments, zero vectors split evenly.

    Odd sectors run V0-Vn-Vn+1-V7-Vn+1-Vn-V0, even sectors swap the two
    active vectors so every transition moves a single leg.
    """
    first = SwitchState(*(int(s) for s in ACTIVE_VECTORS[t.sector - 1]))
    second = SwitchState(*(int(s) for s in ACTIVE_VECTORS[t.sector % 6]))
    ta, tb = t.T1, t.T2
    if t.sector % 2 == 0:
        first, second, ta, tb = second, first, tb, ta
    half = [(V0, t.T0 / 4), (first, ta / 2), (second, tb / 2)]
    return half + [(V7, t.T0 / 2)] + half[::-1]


def vsi_phase_voltages(s: SwitchState, V_dc: float) -> AbcVector:
    """Line-to-neutral voltages of a two-level inverter with an isolated-neutral load."""
    if not V_dc > 0:
        raise ValueError("V_dc must be positive")
    return AbcVector(*_vsi(s.s_a, s.s_b, s.s_c, float(V_dc)))


def switch_state_vector(s: SwitchState, V_dc: float) -> AlphaBetaVector:
    v = vsi_phase_voltages(s, V_dc)
    return AlphaBetaVector(*_clarke(v.a, v.b, v.c))


def phase_duties(method: str, amplitude: float, angle: float, V_dc: float,
                 dpwm: DpwmConfig = DpwmConfig()) -> tuple[float, float, float]:
    """Average upper-leg duties synthesising a balanced phase-voltage reference.

    ``amplitude`` is the phase-voltage peak in volts, ``angle`` the electrical
    angle of phase a. Raises :class:`OverModulationError` outside the linear
    range of ``method`` ("spwm", "dpwm" or "svpwm").
    """
    half = V_dc / 2.0
    va = amplitude * math.cos(angle)
    vb = amplitude * math.cos(angle - 2 * PI_3)
    vc = amplitude * math.cos(angle + 2 * PI_3)
    if method == "svpwm":
        v = AlphaBetaVector(*_clarke(va, vb, vc))
        return svpwm_duties(svpwm_times(v, V_dc, 1.0))
    if method == "spwm":
        refs = (va / half, vb / half, vc / half)
    elif method == "dpwm":
        refs = _dpwm_refs(va / half, vb / half, vc / half, angle, dpwm.delta, dpwm.phi)
    else:
        raise ValueError(f"unknown carrier method {method!r}")
    peak = max(abs(r) for r in refs)
    if peak > 1.0 + 1e-12:
        raise OverModulationError(f"{method} reference peak {peak:.6g} exceeds the carrier", 1.0 / peak)
    return tuple((1.0 + r) / 2.0 for r in refs)


def linear_range_limit(method: str, V_dc: float, n_angles: int = 720, tol: float = 1e-9) -> float:
    """Largest phase-voltage fundamental a method synthesises without over-modulation.

    Bisects the reference amplitude; at the boundary the fundamental of the
    leg-averaged phase voltage (common mode removed) is measured by a DFT over
    one period of reference angles.
    """
    angles = 2 * math.pi * np.arange(n_angles) / n_angles

    def synthesised(amp):
        try:
            duties = np.array([phase_duties(method, amp, a, V_dc) for a in angles])
        except OverModulationError:
            return None
        pole = duties * V_dc
        return pole[:, 0] - pole.mean(axis=1)

    lo, hi = 0.0, V_dc
    while hi - lo > tol * V_dc:
        mid = 0.5 * (lo + hi)
        if synthesised(mid) is None:
            hi = mid
        else:
            lo = mid
    va = synthesised(lo)
    return 2.0 * abs(np.fft.rfft(va)[1]) / n_angles
