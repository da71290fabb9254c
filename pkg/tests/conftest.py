import numpy as np
import pytest
from hypothesis import settings

from hamsim.harness import load_scenario

settings.register_profile("hamsim", deadline=None, max_examples=60)
settings.load_profile("hamsim")

PAULI2_TERMS = [(1.0, "XI"), (1.0, "ZZ")]
HEIS3_TERMS = [(1.0, lbl) for lbl in ("XXI", "YYI", "ZZI", "IXX", "IYY", "IZZ")]


@pytest.fixture(scope="session")
def pauli2():
    return load_scenario("pauli2")


@pytest.fixture(scope="session")
def heis3():
    return load_scenario("heis3")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
