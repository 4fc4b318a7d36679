"""Scenario and modulator configuration, YAML config files and CLI overrides."""

from __future__ import annotations

import copy
import math
from dataclasses import asdict, dataclass, field, replace

import yaml

from focsim.control import ConfigurationError, FocConfig, PiController, compute_default_gains
from focsim.machines import ImParams, SpmsmParams
from focsim.modulation import DpwmConfig, HysteresisConfig

MODULATOR_KINDS = ("hcc", "spwm", "dpwm", "svpwm", "average")
BENCHMARK_ORDER = ("hcc", "dpwm", "spwm", "svpwm")


@dataclass(frozen=True)
class ModulatorConfig:
    """Choice of switching technique plus its parameters.

    ``average`` is an ideal average-value inverter (no switching) used for
    controller checks.
    """

    kind: str
    hysteresis: HysteresisConfig = field(default_factory=HysteresisConfig)
    dpwm: DpwmConfig = field(default_factory=DpwmConfig)

    def __post_init__(self):
        if self.kind not in MODULATOR_KINDS:
            raise ConfigurationError(f"unknown modulator {self.kind!r}; choose from {MODULATOR_KINDS}")

    @property
    def name(self) -> str:
        return self.kind

    def params(self) -> dict:
        if self.kind == "hcc":
            return {"band": self.hysteresis.band}
        if self.kind == "dpwm":
            return {"delta": self.dpwm.delta, "phi": self.dpwm.phi}
        return {}


def modulator(kind: str, **params) -> ModulatorConfig:
    """``modulator("hcc", band=0.2)``, ``modulator("dpwm", delta=0.3)``..."""
    if kind == "hcc":
        return ModulatorConfig(kind, hysteresis=HysteresisConfig(**params))
    if kind == "dpwm":
        return ModulatorConfig(kind, dpwm=DpwmConfig(**params))
    if params:
        raise ConfigurationError(f"{kind} takes no parameters, got {sorted(params)}")
    return ModulatorConfig(kind)


@dataclass(frozen=True)
class ScenarioSpec:
    duration: float
    speed_schedule: tuple[tuple[float, float], ...]
    load_schedule: tuple[tuple[float, float], ...]
    thd_windows: tuple[tuple[float, int], ...]
    machine: SpmsmParams
    control: FocConfig
    V_dc: float = 400.0
    dt: float = 1e-6
    t_pwm: float = 100e-6
    decimation: int = 100
    gate_record: float = 5e-3
    thd_f1_hz: float | None = None
    n_harmonics: int = 200
    thd_interharmonics: bool = True
    bandwidths: tuple[float, float] | None = None

    def __post_init__(self):
        for name in ("speed_schedule", "load_schedule"):
            sched = getattr(self, name)
            if not sched or sched[0][0] != 0:
                raise ConfigurationError(f"{name} must start at t = 0")
            times = [t for t, _ in sched]
            if times != sorted(times):
                raise ConfigurationError(f"{name} must be time-sorted")
        if self.duration < 0:
            raise ConfigurationError("duration must be non-negative")
        last = max([t for t, _ in self.speed_schedule] + [t for t, _ in self.load_schedule]
                   + [t for t, _ in self.thd_windows])
        if self.duration < last:
            raise ConfigurationError(f"duration {self.duration} s ends before the last scheduled event {last} s")
        if not self.V_dc > 0:
            raise ConfigurationError("V_dc must be positive")
        if not self.dt > 0:
            raise ConfigurationError("dt must be positive")
        ratio = self.t_pwm / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * ratio or round(ratio) < 1:
            raise ConfigurationError(f"t_pwm={self.t_pwm} is not an integer multiple of dt={self.dt}")
        if self.control.control_period is not None:
            r = self.control.control_period / self.dt
            if abs(r - round(r)) > 1e-9 * r or round(r) < 1:
                raise ConfigurationError("control_period must be an integer multiple of dt")
        if self.decimation < 1:
            raise ConfigurationError("decimation must be >= 1")

    def speed_ref(self, t: float) -> float:
        return _step_value(self.speed_schedule, t)

    def load(self, t: float) -> float:
        return _step_value(self.load_schedule, t)

    def fast(self) -> "ScenarioSpec":
        """CI variant: 5 us step, same PWM period."""
        return replace(self, dt=5e-6)

    def to_dict(self) -> dict:
        return scenario_to_dict(self)


def _step_value(schedule, t: float) -> float:
    """Right-continuous step function: the value at an event time is the new one."""
    value = schedule[0][1]
    for t_k, v in schedule:
        if t_k <= t:
            value = v
        else:
            break
    return value


def v_limit_for(kind: str, V_dc: float) -> float:
    """Linear-range phase-voltage magnitude used as the dq voltage cap."""
    if kind in ("svpwm", "dpwm", "average"):
        return V_dc / math.sqrt(3.0)
    return V_dc / 2.0


def default_scenario(**control_overrides) -> ScenarioSpec:
    """2 s benchmark: 100 rad/s at 5 N m from standstill, 300 rad/s from 0.3 s,
    8 N m from 1.0 s; THD windows of 10 cycles ending at 0.8 s and 1.9 s."""
    machine = SpmsmParams()
    f_cc, f_sc = 1000.0, 50.0
    control = compute_default_gains(machine, f_cc, f_sc, 100e-6, **control_overrides)
    return ScenarioSpec(
        duration=2.0,
        speed_schedule=((0.0, 100.0), (0.3, 300.0)),
        load_schedule=((0.0, 5.0), (1.0, 8.0)),
        thd_windows=((0.8, 10), (1.9, 10)),
        machine=machine,
        control=control,
        V_dc=400.0,
        dt=1e-6,
        t_pwm=100e-6,
        bandwidths=(f_cc, f_sc),
    )


# --- dict / YAML round trip -----------------------------------------------------


def _pi_dict(c: PiController) -> dict:
    return {"K_p": c.K_p, "K_i": c.K_i}


def scenario_to_dict(spec: ScenarioSpec, modulators: dict | None = None) -> dict:
    c = spec.control
    out = {
        "duration": spec.duration,
        "sim": {"dt": spec.dt, "t_pwm": spec.t_pwm, "decimation": spec.decimation,
                "gate_record": spec.gate_record},
        "machine": asdict(spec.machine),
        "inverter": {"V_dc": spec.V_dc},
        "speed_schedule": [list(p) for p in spec.speed_schedule],
        "load_schedule": [list(p) for p in spec.load_schedule],
        "thd": {"windows": [list(w) for w in spec.thd_windows], "n_harmonics": spec.n_harmonics,
                "f1_hz": spec.thd_f1_hz, "interharmonics": spec.thd_interharmonics,
                "f1_source": "speed" if spec.thd_f1_hz is None else "fixed"},
        "control": {
            "i_d_ref": c.i_d_ref,
            "i_q_limit": c.i_q_limit,
            "v_limit": c.v_limit,
            "decoupling": c.decoupling_enabled,
            "control_period": c.control_period,
            "speed_pi": _pi_dict(c.speed_pi),
            "id_pi": _pi_dict(c.id_pi),
            "iq_pi": _pi_dict(c.iq_pi),
        },
    }
    if spec.bandwidths is not None:
        out["control"]["f_cc"], out["control"]["f_sc"] = spec.bandwidths
    if modulators is not None:
        out["modulators"] = modulators
    return out


DEFAULT_MODULATOR_PARAMS = {"hcc": {"band": 3.0}, "dpwm": {"delta": 0.0, "phi": 0.0}}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def resolve_config(raw: dict | None = None) -> dict:
    """Fill a (partial) config dict from the benchmark defaults.

    When ``control.f_cc``/``f_sc`` are given, PI gains are designed from them
    unless a controller's gains are set explicitly.
    """
    raw = raw or {}
    base = scenario_to_dict(default_scenario(), DEFAULT_MODULATOR_PARAMS)
    # gains are re-derived below unless given explicitly
    for key in ("speed_pi", "id_pi", "iq_pi"):
        base["control"].pop(key)
    cfg = _merge(base, raw)
    ctl = cfg["control"]
    machine = SpmsmParams(**cfg["machine"])
    f_cc, f_sc = ctl.get("f_cc"), ctl.get("f_sc")
    designed = compute_default_gains(machine, f_cc, f_sc, cfg["sim"]["t_pwm"])
    for key in ("speed_pi", "id_pi", "iq_pi"):
        ctl[key] = _merge(_pi_dict(getattr(designed, key)), ctl.get(key) or {})
    return cfg


def scenario_from_dict(cfg: dict) -> ScenarioSpec:
    cfg = resolve_config(cfg)
    ctl = cfg["control"]
    control = FocConfig(
        speed_pi=PiController(**ctl["speed_pi"]),
        id_pi=PiController(**ctl["id_pi"]),
        iq_pi=PiController(**ctl["iq_pi"]),
        i_d_ref=ctl["i_d_ref"],
        i_q_limit=ctl["i_q_limit"],
        v_limit=ctl["v_limit"],
        decoupling_enabled=bool(ctl["decoupling"]),
        control_period=ctl["control_period"],
    )
    return ScenarioSpec(
        duration=float(cfg["duration"]),
        speed_schedule=tuple((float(t), float(v)) for t, v in cfg["speed_schedule"]),
        load_schedule=tuple((float(t), float(v)) for t, v in cfg["load_schedule"]),
        thd_windows=tuple((float(t), int(n)) for t, n in cfg["thd"]["windows"]),
        machine=SpmsmParams(**cfg["machine"]),
        control=control,
        V_dc=float(cfg["inverter"]["V_dc"]),
        dt=float(cfg["sim"]["dt"]),
        t_pwm=float(cfg["sim"]["t_pwm"]),
        decimation=int(cfg["sim"]["decimation"]),
        gate_record=float(cfg["sim"]["gate_record"]),
        thd_f1_hz=cfg["thd"]["f1_hz"],
        n_harmonics=int(cfg["thd"]["n_harmonics"]),
        thd_interharmonics=bool(cfg["thd"]["interharmonics"]),
        bandwidths=(ctl["f_cc"], ctl["f_sc"]) if ctl.get("f_cc") is not None else None,
    )


def modulators_from_dict(cfg: dict, kinds=None) -> list[ModulatorConfig]:
    params = _merge(DEFAULT_MODULATOR_PARAMS, cfg.get("modulators") or {})
    kinds = kinds or BENCHMARK_ORDER
    return [modulator(k, **params.get(k, {})) for k in kinds]


def load_config(path) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be a mapping")
    return data


def dump_config(cfg: dict, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(cfg, fh, sort_keys=True)


def im_from_dict(cfg: dict) -> tuple[ImParams, float, float, list[float]]:
    """Induction-motor section: params, phase voltage, supply speed, slip grid."""
    im = dict(DEFAULT_IM)
    im.update(cfg.get("im") or {})
    slip = dict(DEFAULT_IM["slip"])
    slip.update(im.get("slip") or {})
    params = ImParams(**{k: im[k] for k in ("R", "R_r", "L_ls", "L_lr", "L_m", "pole_pairs")})
    n = int(slip["n"])
    start, stop = float(slip["start"]), float(slip["stop"])
    grid = [start + (stop - start) * i / (n - 1) for i in range(n)] if n > 1 else [start]
    return params, float(im["V_s"]), float(im["omega_e"]), grid


# a generic 4-pole, 50 Hz machine for torque-slip curves
DEFAULT_IM = {
    "R": 0.5, "R_r": 0.4, "L_ls": 0.002, "L_lr": 0.002, "L_m": 0.08, "pole_pairs": 2,
    "V_s": 230.0, "omega_e": 2 * math.pi * 50,
    "slip": {"start": 0.005, "stop": 1.0, "n": 200},
}
