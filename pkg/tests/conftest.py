import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def stable_samples(rng, n):
    """Random (d, y) pairs strictly inside the stable region."""
    d = -rng.uniform(0.52, 0.85, n)
    y = rng.uniform(0.02, 0.95, n)
    return list(zip(d, y))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
