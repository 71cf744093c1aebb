import pytest

from app.core.config import settings
from app.core.logging import reset_logging
from app.schemas.scenario import ScenarioConfig


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run full-scale sweeps")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def small_scenario(**sections) -> ScenarioConfig:
    """A desk-sized scenario: 4 FBSs, 5 power levels, short iteration budget."""
    data = {
        "seed": 11,
        "power": {"p_min_dbm": -20.0, "p_max_dbm": 20.0, "n_power": 5, "step_db": None},
        "learning": {"max_iterations": 400},
        "phases": {"seed_agents": 2, "m_max": 4},
        "convergence": {"window": 50, "tolerance": 1e-3},
        "output": {"trace_stride": 5},
    }
    for name, values in sections.items():
        if isinstance(values, dict):
            data.setdefault(name, {}).update(values)
        else:
            data[name] = values
    return ScenarioConfig.model_validate(data)


@pytest.fixture
def small_config() -> ScenarioConfig:
    return small_scenario()


@pytest.fixture(autouse=True)
def _cli_logging():
    # main() installs a stderr handler bound to the captured stream of that test
    yield
    reset_logging()


@pytest.fixture
def results_store(monkeypatch):
    # sqlite file inside each run's output directory
    monkeypatch.setattr(settings, "DATABASE_URL", None)
