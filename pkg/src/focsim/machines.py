"""Machine models.

* Surface-mounted PMSM in the rotor (dq) frame, used by the closed-loop
  simulator.
* Steady-state per-phase induction-motor equivalent circuit, used for
  torque-slip analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from focsim.simcore import write_csv
from focsim.transforms import DqVector


@dataclass(frozen=True)
class SpmsmParams:
    """SPMSM constants. Defaults are the benchmark machine (4 pole pairs)."""

    r_s: float = 0.675
    L: float = 0.000835
    pole_pairs: int = 4
    lambda_m: float = 0.11
    J: float = 0.01
    B: float = 0.001

    def __post_init__(self):
        if not (self.r_s > 0 and self.L > 0 and self.lambda_m > 0 and self.J > 0):
            raise ValueError(f"r_s, L, lambda_m and J must be positive: {self}")
        if int(self.pole_pairs) != self.pole_pairs or self.pole_pairs < 1:
            raise ValueError(f"pole_pairs must be a positive integer, got {self.pole_pairs}")
        if self.B < 0:
            raise ValueError(f"B must be non-negative, got {self.B}")

    @property
    def torque_constant(self) -> float:
        """Torque per q-axis ampere, (3/2)*pole_pairs*lambda_m."""
        return 1.5 * self.pole_pairs * self.lambda_m


@dataclass
class SpmsmState:
    i_d: float = 0.0
    i_q: float = 0.0
    omega_m: float = 0.0
    theta_e: float = 0.0

    def __post_init__(self):
        vals = (self.i_d, self.i_q, self.omega_m, self.theta_e)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite state {vals}")
        self.theta_e = self.theta_e % (2.0 * math.pi)

    def as_array(self) -> np.ndarray:
        return np.array([self.i_d, self.i_q, self.omega_m, self.theta_e])

    @classmethod
    def from_array(cls, x) -> "SpmsmState":
        return cls(float(x[0]), float(x[1]), float(x[2]), float(x[3]))


@njit(cache=True)
def _spmsm_torque(i_d, i_q, L, pole_pairs, lambda_m):
    flux_d = lambda_m + L * i_d
    flux_q = L * i_q
    return 1.5 * pole_pairs * (flux_d * i_q - flux_q * i_d)


@njit(cache=True)
def _spmsm_rates(i_d, i_q, omega_m, v_d, v_q, T_L, r_s, L, pole_pairs, lambda_m, J, B):
    omega_e = pole_pairs * omega_m
    did = (v_d - r_s * i_d + omega_e * L * i_q) / L
    diq = (v_q - r_s * i_q - omega_e * L * i_d - omega_e * lambda_m) / L
    T_e = _spmsm_torque(i_d, i_q, L, pole_pairs, lambda_m)
    dwm = (T_e - T_L - B * omega_m) / J
    return did, diq, dwm, omega_e


def spmsm_torque(i_dq: DqVector, p: SpmsmParams) -> float:
    return _spmsm_torque(float(i_dq.d), float(i_dq.q), p.L, p.pole_pairs, p.lambda_m)


def spmsm_derivatives(s: SpmsmState, v_dq: DqVector, T_L: float, p: SpmsmParams) -> np.ndarray:
    """State rates ``[di_d/dt, di_q/dt, domega_m/dt, dtheta_e/dt]``."""
    return np.array(
        _spmsm_rates(
            float(s.i_d), float(s.i_q), float(s.omega_m),
            float(v_dq.d), float(v_dq.q), float(T_L),
            p.r_s, p.L, p.pole_pairs, p.lambda_m, p.J, p.B,
        )
    )


# --- induction motor, steady state -------------------------------------------


@dataclass(frozen=True)
class ImParams:
    R: float
    R_r: float
    L_ls: float
    L_lr: float
    L_m: float
    pole_pairs: int = 2

    def __post_init__(self):
        for name in ("R", "R_r", "L_ls", "L_lr", "L_m"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.pole_pairs < 1:
            raise ValueError("pole_pairs must be >= 1")


def im_slip(omega_e: float, omega_r: float, pole_pairs: int) -> float:
    """Slip from electrical supply speed and mechanical rotor speed."""
    if omega_e == 0:
        raise ZeroDivisionError("slip is undefined at zero supply frequency")
    return (omega_e - pole_pairs * omega_r) / omega_e


def _circuit_matrix(omega_e: float, S: float, p: ImParams) -> np.ndarray:
    jxm = 1j * omega_e * p.L_m
    return np.array(
        [
            [p.R + 1j * omega_e * p.L_ls + jxm, jxm],
            [jxm, p.R_r / S + 1j * omega_e * p.L_lr + jxm],
        ]
    )


def im_solve_circuit(V_s: complex, omega_e: float, S: float, p: ImParams) -> tuple[complex, complex]:
    """Stator and rotor phasor currents ``(I, I_r)`` of the per-phase circuit."""
    if not 0 < S <= 1:
        raise ValueError(f"slip must be in (0, 1] for motoring, got {S}")
    if not omega_e > 0:
        raise ValueError(f"omega_e must be positive, got {omega_e}")
    A = _circuit_matrix(omega_e, S, p)
    try:
        I, I_r = np.linalg.solve(A, np.array([complex(V_s), 0j]))
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"singular circuit at S={S}") from exc
    return complex(I), complex(I_r)


def im_output(I_r: complex, S: float, R_r: float, omega_e: float) -> tuple[float, float]:
    """Mechanical output power and torque, ``T_e = P_out / omega_e``.

    Torque divides by the electrical supply speed, not the rotor speed.
    """
    if not 0 < S <= 1:
        raise ValueError(f"slip must be in (0, 1], got {S}")
    P_out = 3.0 * abs(I_r) ** 2 * R_r * (1.0 - S) / S
    return P_out, P_out / omega_e


@dataclass(frozen=True)
class TorqueSlipRow:
    S: float
    T_e: float
    P_out: float
    I_mag: float


def im_torque_slip_curve(p: ImParams, V_s: float, omega_e: float, slip_grid) -> list[TorqueSlipRow]:
    rows = []
    for S in slip_grid:
        S = float(S)
        try:
            I, I_r = im_solve_circuit(V_s, omega_e, S, p)
            P_out, T_e = im_output(I_r, S, p.R_r, omega_e)
        except ValueError as exc:
            raise ValueError(f"torque-slip point S={S}: {exc}") from exc
        rows.append(TorqueSlipRow(S, T_e, P_out, abs(I)))
    return rows


def torque_slip_to_csv(rows: list[TorqueSlipRow], path) -> None:
    write_csv(
        path,
        ["S", "Te", "Pout", "I_mag"],
        [[r.S for r in rows], [r.T_e for r in rows], [r.P_out for r in rows], [r.I_mag for r in rows]],
    )
