"""Closed-loop runs of one scenario with one modulator."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from focsim.analysis import SpeedMetrics, WindowThd, fundamental_frequency, speed_metrics, thd_window
from focsim.harness import kernel
from focsim.harness.scenario import ModulatorConfig, ScenarioSpec, modulator, scenario_to_dict, v_limit_for
from focsim.simcore import SimulationDiverged, TimeSeries, extract_window, write_csv

log = logging.getLogger(__name__)

OVERMODULATION_WARN_S = 10e-3


@dataclass
class RunReport:
    modulator: str
    thd_per_window: list[float]
    windows: list[WindowThd]
    metrics: list[SpeedMetrics]
    step_times: list[float]
    traces: dict[str, TimeSeries]
    config_echo: dict
    gates: np.ndarray = field(repr=False, default_factory=lambda: np.zeros((0, 3), dtype=np.int8))
    mod_refs: np.ndarray = field(repr=False, default_factory=lambda: np.zeros((0, 3)))
    final_state: np.ndarray = field(default_factory=lambda: np.zeros(4))
    warnings: list[str] = field(default_factory=list)
    voltage_limited_periods: int = 0

    def rise_time(self, t_step: float) -> float | None:
        for t, m in zip(self.step_times, self.metrics):
            if abs(t - t_step) < 1e-12:
                return m.rise_time
        raise KeyError(f"no speed step at t={t_step}")

    def write_outputs(self, out_dir, spectrum_f_max: float | None = None) -> None:
        """``speed_<mod>.csv``, ``spectrum_<mod>.csv`` (first window) and ``gates_<mod>.csv``."""
        from pathlib import Path

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        name = self.modulator
        sp = self.traces["omega_m"]
        cols = [sp.times] + [self.traces[k].samples for k in ("omega_m", "T_e", "i_d", "i_q", "v_d", "v_q")]
        write_csv(out / f"speed_{name}.csv", ["t", "omega_m", "T_e", "i_d", "i_q", "v_d", "v_q"], cols)
        if self.windows:
            self.windows[0].spectrum.to_csv(out / f"spectrum_{name}.csv", spectrum_f_max)
        dt = self.config_echo["sim"]["dt"]
        t = dt * np.arange(len(self.gates))
        write_csv(out / f"gates_{name}.csv", ["t", "sa", "sb", "sc"],
                  [t, self.gates[:, 0], self.gates[:, 1], self.gates[:, 2]])
        if name not in ("hcc", "average"):
            write_csv(out / f"refs_{name}.csv", ["t", "va_ref", "vb_ref", "vc_ref"],
                      [t, self.mod_refs[:, 0], self.mod_refs[:, 1], self.mod_refs[:, 2]])


def _event_steps(schedule, dt) -> tuple[np.ndarray, np.ndarray]:
    # first step whose time is >= the event time (right-continuous steps)
    k = np.array([int(math.ceil(t / dt - 1e-9)) for t, _ in schedule], dtype=np.int64)
    v = np.array([float(val) for _, val in schedule])
    return k, v


def run_scenario(spec: ScenarioSpec, mod: ModulatorConfig | str, record_refs: bool = False,
                 x0=None) -> RunReport:
    """Simulate the vector-controlled drive under ``spec`` with one modulator.

    Phase currents are kept at full rate as ``i_a``, ``i_b``, ``i_c``; speed,
    torque, dq currents and voltages every ``spec.decimation`` steps. THD is
    evaluated on phase a for every configured window, speed metrics for every
    speed-reference step.
    """
    if isinstance(mod, str):
        mod = modulator(mod)
    code = kernel.MODULATOR_CODES[mod.kind]
    ctl = spec.control
    dt = spec.dt
    n_steps = int(round(spec.duration / dt))
    spp = int(round(spec.t_pwm / dt))
    if ctl.control_period is not None:
        ctrl_steps = int(round(ctl.control_period / dt))
    else:
        ctrl_steps = 1 if mod.kind == "hcc" else spp
    v_limit = ctl.v_limit if ctl.v_limit is not None else v_limit_for(mod.kind, spec.V_dc)
    m = spec.machine
    machine = np.array([m.r_s, m.L, float(m.pole_pairs), m.lambda_m, m.J, m.B])
    gains = np.array([ctl.speed_pi.K_p, ctl.speed_pi.K_i, ctl.id_pi.K_p, ctl.id_pi.K_i,
                      ctl.iq_pi.K_p, ctl.iq_pi.K_i])
    speed_k, speed_v = _event_steps(spec.speed_schedule, dt)
    load_k, load_v = _event_steps(spec.load_schedule, dt)
    dec = spec.decimation
    n_dec = (n_steps + dec - 1) // dec
    n_gate = min(n_steps, int(round(spec.gate_record / dt)))

    i_abc = np.zeros((n_steps, 3))
    i_ref = np.zeros((n_steps if record_refs else 0, 3))
    dec_arr = np.zeros((n_dec, 7))
    gates = np.zeros((n_gate, 3), dtype=np.int8)
    mod_refs = np.zeros((n_gate, 3))
    x_init = np.zeros(4) if x0 is None else np.asarray(x0, dtype=float)
    integ0 = np.array([ctl.speed_pi.integrator, ctl.id_pi.integrator, ctl.iq_pi.integrator])
    band = mod.hysteresis.band
    delta, phi = mod.dpwm.delta, mod.dpwm.phi

    status, k_end, x, _integ, om_max, vlim = kernel.run_loop(
        machine, spec.V_dc, dt, n_steps, spp, ctrl_steps,
        speed_k, speed_v, load_k, load_v,
        gains, ctl.i_q_limit, v_limit, ctl.decoupling_enabled, ctl.i_d_ref,
        code, band, delta, phi,
        dec, n_gate, record_refs,
        x_init, integ0,
        i_abc, i_ref, dec_arr, gates, mod_refs,
    )
    if status != 0:
        raise SimulationDiverged(
            f"{mod.kind}: simulation diverged at t={k_end * dt:.6g} s, last state {x.tolist()}",
            t=k_end * dt, state=x,
        )

    echo = scenario_to_dict(spec)
    echo["modulator"] = {"kind": mod.kind, **mod.params()}
    echo["resolved"] = {"v_limit": v_limit, "control_period": ctrl_steps * dt}

    traces = {}
    for j, name in enumerate(("i_a", "i_b", "i_c")):
        traces[name] = TimeSeries(name, dt, 0.0, i_abc[:, j])
    if record_refs:
        for j, name in enumerate(("i_a_ref", "i_b_ref", "i_c_ref")):
            traces[name] = TimeSeries(name, dt, 0.0, i_ref[:, j])
    for j, name in enumerate(("omega_m", "T_e", "i_d", "i_q", "v_d", "v_q", "i_q_ref")):
        traces[name] = TimeSeries(name, dt * dec, 0.0, dec_arr[:, j])

    warnings = []
    if om_max * ctrl_steps * dt > OVERMODULATION_WARN_S:
        warnings.append(f"over-modulation sustained for {om_max * ctrl_steps * dt * 1e3:.3g} ms")
    if vlim:
        log.info("%s: voltage limit active in %d control periods", mod.kind, vlim)

    windows = [_window_thd(spec, traces, t_end, n_cycles) for t_end, n_cycles in spec.thd_windows]

    step_times, metrics = [], []
    speed = traces["omega_m"]
    sched = spec.speed_schedule
    for i, (t_step, ref_after) in enumerate(sched):
        ref_before = float(x_init[2]) if i == 0 else sched[i - 1][1]
        if t_step >= spec.duration or ref_after == ref_before:
            continue
        t_stop = sched[i + 1][0] if i + 1 < len(sched) else spec.duration
        # end the assessment at the next disturbance (speed or load event)
        later_loads = [t for t, _ in spec.load_schedule if t > t_step]
        if later_loads:
            t_stop = min(t_stop, later_loads[0])
        step_times.append(t_step)
        metrics.append(speed_metrics(speed, ref_before, ref_after, t_step, t_stop))

    for w in warnings:
        log.warning("%s: %s", mod.kind, w)
    return RunReport(
        modulator=mod.kind,
        thd_per_window=[w.thd for w in windows],
        windows=windows,
        metrics=metrics,
        step_times=step_times,
        traces=traces,
        config_echo=echo,
        gates=gates,
        mod_refs=mod_refs,
        final_state=x,
        warnings=warnings,
        voltage_limited_periods=int(vlim),
    )


def _window_thd(spec: ScenarioSpec, traces, t_end: float, n_cycles: int) -> WindowThd:
    if spec.thd_f1_hz is not None:
        f1 = spec.thd_f1_hz
    else:
        # mean speed over the nominal window sets the electrical fundamental
        speed = traces["omega_m"]
        f_guess = fundamental_frequency(max(speed.value_at(t_end - 1e-9), 0.0), spec.machine.pole_pairs)
        if f_guess <= 0:
            raise ValueError(f"rotor at standstill before t={t_end}; THD fundamental undefined")
        t0 = max(0.0, t_end - n_cycles / f_guess)
        w = extract_window(speed, t0, t_end)
        f1 = fundamental_frequency(max(float(np.mean(w.samples)), 0.0), spec.machine.pole_pairs)
    return thd_window(traces["i_a"], t_end, f1, n_cycles, spec.n_harmonics, spec.thd_interharmonics)
