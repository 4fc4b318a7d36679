"""Fixed-step time base, RK4 stepping and uniformly sampled signal records."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class SimulationDiverged(RuntimeError):
    """Raised when a state or state-rate component stops being finite."""

    def __init__(self, message: str, t: float | None = None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class WindowRangeError(ValueError):
    """Requested time window lies (partly) outside a recorded series."""


def _is_multiple(x: float, step: float, rtol: float = 1e-9) -> bool:
    k = round(x / step)
    return abs(x - k * step) <= rtol * max(abs(x), step)


@dataclass
class SimClock:
    """Simulation clock on the ``dt`` grid with a PWM period ``t_pwm``."""

    dt: float = 1e-6
    t_pwm: float = 100e-6
    t: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (self.t_pwm > 0 and _is_multiple(self.t_pwm, self.dt)):
            raise ValueError(f"t_pwm={self.t_pwm} is not an integer multiple of dt={self.dt}")
        if self.t < 0 or not _is_multiple(self.t, self.dt):
            raise ValueError(f"t={self.t} is not a non-negative multiple of dt")

    @property
    def steps_per_pwm(self) -> int:
        return int(round(self.t_pwm / self.dt))

    def steps(self, duration: float) -> int:
        """Number of ``dt`` steps that fit in ``duration``."""
        return int(round(duration / self.dt))


@dataclass
class TimeSeries:
    label: str
    dt: float
    t0: float = 0.0
    samples: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def t_end(self) -> float:
        """One sample period past the last sample (exclusive end)."""
        return self.t0 + len(self.samples) * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.samples))

    def value_at(self, t: float) -> float:
        """Sample at or immediately before ``t``."""
        k = int(math.floor((t - self.t0) / self.dt + 1e-9))
        if k < 0 or k >= len(self.samples):
            raise WindowRangeError(f"t={t} outside [{self.t0}, {self.t_end})")
        return float(self.samples[k])

    def to_csv(self, path) -> None:
        write_csv(path, ["t", self.label], [self.times, self.samples])


def write_csv(path, header: list[str], columns: list) -> None:
    """Write equal-length columns with 12 significant digits."""
    cols = [np.asarray(c) for c in columns]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([_fmt(v) for v in row])


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.12g}"


def read_timeseries_csv(path) -> TimeSeries:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    label = rows[0][1]
    data = np.array([[float(x) for x in r] for r in rows[1:]])
    if len(data) < 2:
        raise ValueError("need at least two rows to recover the sample period")
    dt = float(data[1, 0] - data[0, 0])
    return TimeSeries(label, dt, float(data[0, 0]), data[:, 1])


def rk4_step(derivative_fn: Callable[[np.ndarray], np.ndarray], state, dt: float) -> np.ndarray:
    """Advance ``state`` by one classic fourth-order Runge-Kutta step.

    ``derivative_fn`` sees only the state; any inputs it closes over are held
    constant across the step (zero-order hold).
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    x = np.asarray(state, dtype=float)
    _check_finite(x, "state")
    k1 = np.asarray(derivative_fn(x), dtype=float)
    _check_finite(k1, "derivative")
    k2 = np.asarray(derivative_fn(x + 0.5 * dt * k1), dtype=float)
    k3 = np.asarray(derivative_fn(x + 0.5 * dt * k2), dtype=float)
    k4 = np.asarray(derivative_fn(x + dt * k3), dtype=float)
    out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    _check_finite(out, "state")
    return out


def _check_finite(x: np.ndarray, what: str) -> None:
    bad = np.flatnonzero(~np.isfinite(np.atleast_1d(x)))
    if bad.size:
        raise SimulationDiverged(f"non-finite {what} component {int(bad[0])}", state=x)


def extract_window(series: TimeSeries, t_start: float, t_end: float) -> TimeSeries:
    """Samples with ``t_start <= t < t_end``.

    The first sample is the one at or immediately after ``t_start``; the
    window length is ``round((t_end - t_start) / dt)`` samples.
    """
    tol = 1e-9 * series.dt
    if not t_start < t_end:
        raise WindowRangeError(f"empty window [{t_start}, {t_end})")
    if t_start < series.t0 - tol or t_end > series.t_end + tol:
        raise WindowRangeError(
            f"window [{t_start}, {t_end}) outside recorded range [{series.t0}, {series.t_end}]"
        )
    k0 = max(0, int(math.ceil((t_start - series.t0) / series.dt - 1e-6)))
    n = max(1, int(round((t_end - t_start) / series.dt)))
    n = min(n, len(series) - k0)
    return TimeSeries(series.label, series.dt, series.t0 + k0 * series.dt, series.samples[k0 : k0 + n].copy())
