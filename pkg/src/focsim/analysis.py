"""Spectra, harmonic distortion and step-response metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from focsim.simcore import TimeSeries, extract_window, write_csv


class AnalysisError(ValueError):
    pass


@dataclass
class Spectrum:
    """One-sided amplitude spectrum (peak convention) with bin width ``f0``."""

    f0: float
    magnitudes: np.ndarray
    n_samples: int

    @property
    def frequencies(self) -> np.ndarray:
        return self.f0 * np.arange(len(self.magnitudes))

    def to_csv(self, path, f_max: float | None = None) -> None:
        f = self.frequencies
        keep = slice(None) if f_max is None else f <= f_max
        write_csv(path, ["f_hz", "magnitude"], [f[keep], self.magnitudes[keep]])


def dft(samples: TimeSeries) -> Spectrum:
    """Amplitude spectrum of a real series.

    Scaled so that a sinusoid of amplitude A sitting on a bin reports A; the
    DC and (even-length) Nyquist bins are not doubled.
    """
    n = len(samples)
    if n < 2:
        raise AnalysisError(f"need at least 2 samples, got {n}")
    mags = np.abs(np.fft.rfft(samples.samples)) * (2.0 / n)
    mags[0] *= 0.5
    if n % 2 == 0:
        mags[-1] *= 0.5
    return Spectrum(1.0 / (n * samples.dt), mags, n)


def thd(spec: Spectrum, f1: float, n_harmonics: int = 200, interharmonics: bool = False) -> float:
    """sqrt(sum of squared harmonic magnitudes 2..n) / fundamental magnitude.

    With ``interharmonics=True`` every non-DC bin up to ``n_harmonics * f1``
    other than the fundamental is counted, so carrier sidebands that are not
    integer multiples of ``f1`` contribute. Harmonics beyond the last bin are
    skipped.
    """
    if n_harmonics < 2:
        raise AnalysisError("n_harmonics must be >= 2")
    k1 = f1 / spec.f0
    if not (k1 >= 1 and abs(k1 - round(k1)) <= 1e-6 * max(1.0, k1)):
        raise AnalysisError(f"fundamental {f1} Hz is not on a bin (bin width {spec.f0} Hz)")
    k1 = int(round(k1))
    m1 = spec.magnitudes[k1]
    # leakage-level fundamentals count as absent
    if m1 <= 1e-12 * max(float(np.max(spec.magnitudes)), np.finfo(float).tiny):
        raise AnalysisError("fundamental magnitude is zero; THD undefined")
    if interharmonics:
        idx = np.arange(1, min(len(spec.magnitudes), k1 * n_harmonics + 1))
        idx = idx[idx != k1]
    else:
        idx = k1 * np.arange(2, n_harmonics + 1)
        idx = idx[idx < len(spec.magnitudes)]
    return float(math.sqrt(np.sum(spec.magnitudes[idx] ** 2)) / m1)


def fundamental_frequency(omega_m: float, pole_pairs: int) -> float:
    """Electrical frequency in Hz for a mechanical speed in rad/s."""
    if omega_m < 0:
        raise ValueError("omega_m must be non-negative")
    return pole_pairs * omega_m / (2.0 * math.pi)


@dataclass
class WindowThd:
    thd: float
    f1: float
    t_start: float
    t_end: float
    n_samples: int
    spectrum: Spectrum


def thd_window(current: TimeSeries, t_end: float, f1: float, n_cycles: int = 10,
               n_harmonics: int = 200, interharmonics: bool = False) -> WindowThd:
    """THD over ``n_cycles`` fundamental periods ending at ``t_end``.

    The window is rounded to a whole number of samples and ``f1`` is
    re-derived from the rounded length, so the fundamental lands on bin
    ``n_cycles`` exactly.
    """
    if not f1 > 0:
        raise AnalysisError(f"fundamental frequency must be positive, got {f1}")
    n = int(round(n_cycles / (f1 * current.dt)))
    if n < 2:
        raise AnalysisError("window shorter than two samples")
    t_start = t_end - n * current.dt
    win = extract_window(current, t_start, t_end)
    spec = dft(win)
    f1_grid = n_cycles * spec.f0
    nyquist_harmonics = int((len(spec.magnitudes) - 1) // n_cycles)
    value = thd(spec, f1_grid, min(n_harmonics, max(2, nyquist_harmonics)), interharmonics)
    return WindowThd(value, f1_grid, win.t0, win.t_end, len(win), spec)


def thd_at_window(current_trace: TimeSeries, t_end: float, f1: float, n_cycles: int = 10,
                  n_harmonics: int = 200, interharmonics: bool = False) -> float:
    return thd_window(current_trace, t_end, f1, n_cycles, n_harmonics, interharmonics).thd


@dataclass
class SpeedMetrics:
    """Step-response figures; ``None`` marks a metric the trace never defines."""

    rise_time: float | None
    settling_time: float | None
    overshoot: float | None
    steady_state_error: float | None


def _crossing(t: np.ndarray, y: np.ndarray, level: float) -> float | None:
    """First time ``y`` reaches ``level`` (linear interpolation between samples)."""
    hit = np.flatnonzero(y >= level)
    if hit.size == 0:
        return None
    k = int(hit[0])
    if k == 0:
        return float(t[0])
    y0, y1 = y[k - 1], y[k]
    return float(t[k - 1] + (level - y0) / (y1 - y0) * (t[k] - t[k - 1]))


def speed_metrics(trace: TimeSeries, ref_before: float, ref_after: float, t_step: float,
                  t_stop: float | None = None, band: float = 0.02) -> SpeedMetrics:
    """10-90 % rise time, +-2 % settling time, overshoot and final error of a step.

    Only samples in ``[t_step, t_stop)`` are considered. Settling and
    overshoot are relative to the step size; the steady-state error is the
    last sample's deviation relative to ``|ref_after|`` (or the step size when
    ``ref_after`` is zero).
    """
    step = ref_after - ref_before
    if step == 0:
        raise AnalysisError("ref_after must differ from ref_before")
    t = trace.times
    keep = t >= t_step - 1e-12
    if t_stop is not None:
        keep &= t < t_stop - 1e-12
    t = t[keep]
    if t.size == 0:
        raise AnalysisError(f"trace does not cover t_step={t_step}")
    # normalised progress: 0 at ref_before, 1 at ref_after
    y = (trace.samples[keep] - ref_before) / step

    t10 = _crossing(t, y, 0.1)
    t90 = _crossing(t, y, 0.9)
    rise = None if t10 is None or t90 is None else t90 - t10
    overshoot = None
    if t90 is not None:
        overshoot = max(0.0, float(np.max(y) - 1.0))

    settling = None
    outside = np.flatnonzero(np.abs(y - 1.0) > band)
    if outside.size == 0:
        settling = 0.0
    elif outside[-1] < len(y) - 1:
        settling = float(t[outside[-1] + 1] - t_step)

    scale = abs(ref_after) if ref_after != 0 else abs(step)
    sse = abs(float(trace.samples[keep][-1]) - ref_after) / scale
    return SpeedMetrics(rise, settling, overshoot, sse)
