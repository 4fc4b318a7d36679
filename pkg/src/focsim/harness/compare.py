"""Side-by-side runs of several modulators under one shared scenario."""

from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from focsim.control import ConfigurationError
from focsim.harness.runner import RunReport, run_scenario
from focsim.harness.scenario import ModulatorConfig, ScenarioSpec, dump_config, modulator, scenario_to_dict

log = logging.getLogger(__name__)


@dataclass
class ComparisonRow:
    modulator: str
    thd: list[float | None]
    rise_time: list[float | None]
    rank: int | None = None
    status: str = "ok"


@dataclass
class ComparisonReport:
    """One row per modulator in the order requested, plus the full run reports.

    Rank 1 goes to the lowest mean THD over all windows; failed runs keep
    their row with empty numbers and a ``failed: ...`` status.
    """

    rows: list[ComparisonRow]
    windows: list[float]
    step_times: list[float]
    runs: dict[str, RunReport] = field(repr=False, default_factory=dict)
    config_echo: dict = field(repr=False, default_factory=dict)

    def row(self, name: str) -> ComparisonRow:
        for r in self.rows:
            if r.modulator == name:
                return r
        raise KeyError(name)

    def header(self) -> list[str]:
        return (["modulator"] + [f"thd_pct_{t:g}s" for t in self.windows]
                + [f"rise_ms_{t:g}s" for t in self.step_times] + ["rank", "status"])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.header())
            for r in self.rows:
                w.writerow([r.modulator] + [_num(v, 100.0) for v in r.thd]
                           + [_num(v, 1e3) for v in r.rise_time]
                           + ["" if r.rank is None else r.rank, r.status])

    def write(self, out_dir, spectrum_f_max: float | None = None) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        self.to_csv(out / "report.csv")
        for run in self.runs.values():
            run.write_outputs(out, spectrum_f_max)
        dump_config(self.config_echo, out / "config.yaml")
        return out


def _num(v: float | None, scale: float) -> str:
    return "" if v is None else f"{v * scale:.6f}"


def _run_one(spec: ScenarioSpec, mod: ModulatorConfig):
    try:
        return run_scenario(spec, mod), None
    except Exception as exc:  # a failed run becomes a flagged row
        log.error("%s run failed: %s", mod.kind, exc)
        return None, exc


def compare_modulators(spec: ScenarioSpec, modulators: list, max_workers: int | None = None) -> ComparisonReport:
    """Run every modulator on the same ``spec`` and tabulate THD and rise times."""
    mods = [modulator(m) if isinstance(m, str) else m for m in modulators]
    if len(mods) < 2:
        raise ConfigurationError("comparison needs at least two modulators")
    workers = max_workers or min(len(mods), os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda m: _run_one(spec, m), mods))

    windows = [t for t, _ in spec.thd_windows]
    step_times = None
    rows, runs = [], {}
    for mod, (rep, exc) in zip(mods, results):
        if rep is None:
            rows.append(ComparisonRow(mod.kind, [None] * len(windows), [],
                                      status=f"failed: {type(exc).__name__}"))
            continue
        runs[mod.kind] = rep
        step_times = step_times or rep.step_times
        rows.append(ComparisonRow(mod.kind, list(rep.thd_per_window), [m.rise_time for m in rep.metrics]))
    step_times = step_times or []
    for r in rows:
        if len(r.rise_time) < len(step_times):
            r.rise_time += [None] * (len(step_times) - len(r.rise_time))

    scored = [(sum(r.thd) / len(r.thd), i) for i, r in enumerate(rows)
              if r.status == "ok" and r.thd and all(v is not None and math.isfinite(v) for v in r.thd)]
    for rank, (_, i) in enumerate(sorted(scored), start=1):
        rows[i].rank = rank

    echo = scenario_to_dict(spec, {m.kind: m.params() for m in mods})
    echo["compare"] = {"modulators": [m.kind for m in mods]}
    return ComparisonReport(rows, windows, step_times, runs, echo)
