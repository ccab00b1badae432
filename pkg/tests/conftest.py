import pytest
from hypothesis import settings

from infomarket.simulator import SimConfig, simulate_ensemble

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")

VALIDATION_SEED = 7


@pytest.fixture(scope="session")
def validation_ensemble():
    """10,000 binary markets, 100 flips each, one flip per recorded day."""
    return simulate_ensemble(SimConfig(n=100, flips_per_step=1, num_markets=10_000, seed=VALIDATION_SEED))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
