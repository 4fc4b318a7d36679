import pytest

from focsim.harness import default_scenario, run_scenario


@pytest.fixture(scope="session")
def benchmark_spec():
    return default_scenario()


@pytest.fixture(scope="session")
def benchmark_runs(benchmark_spec):
    """Full-resolution benchmark runs, shared across test modules."""
    return {k: run_scenario(benchmark_spec, k) for k in ("hcc", "dpwm", "spwm", "svpwm")}
