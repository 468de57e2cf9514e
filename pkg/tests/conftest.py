import numpy as np
import pytest

from slspec.bc_model import CanonicalBC
from slspec import potential as P

# filled by test_acceptance; printed once at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def t1s1():
    return CanonicalBC("T1", 1, 3, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(scope="session")
def cosine_q():
    return P.cosine()


@pytest.fixture(scope="session")
def sawtooth_q():
    return P.sawtooth()
