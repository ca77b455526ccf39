import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_spd(rng, d, spread=0.5):
    a = rng.standard_normal((d, d))
    return np.eye(d) + spread * (a @ a.T) / d


# acceptance criteria report one line each; repeat them after the run so the
# verdicts are visible even when output is captured
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
