import numpy as np
import pytest

from activesearch import HyperParams, random_instance

# Filled by tests/test_acceptance.py; printed at the end of the run so each
# criterion's verdict is visible even with captured stdout.
ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


@pytest.fixture
def h_default() -> HyperParams:
    return HyperParams()


@pytest.fixture
def h_sharp() -> HyperParams:
    # Distinct label/prior trust so gamma != 0 and the rank-one path is live.
    return HyperParams(lam=1.5, w0=0.05, pi=0.05, alpha=1e-6)


@pytest.fixture
def small_instance():
    return random_instance(60, 6, seed=42)


@pytest.fixture
def first_pos():
    def pick(d):
        return int(np.flatnonzero(d.labels == 1)[0])
    return pick


@pytest.fixture
def first_neg():
    def pick(d):
        return int(np.flatnonzero(d.labels == 0)[0])
    return pick
