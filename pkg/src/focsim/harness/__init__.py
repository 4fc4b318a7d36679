"""Scenario configuration, closed-loop runs and modulator comparison."""

from focsim.harness.scenario import (
    ModulatorConfig,
    ScenarioSpec,
    default_scenario,
    modulator,
)
from focsim.harness.runner import RunReport, run_scenario
from focsim.harness.compare import ComparisonReport, ComparisonRow, compare_modulators

__all__ = [
    "ComparisonReport",
    "ComparisonRow",
    "compare_modulators",
    "ModulatorConfig",
    "RunReport",
    "ScenarioSpec",
    "default_scenario",
    "modulator",
    "run_scenario",
]
