import numpy as np
import pytest

from headswap import EmpiricalNoisePredictor, enumerate_dataset, make_schedule

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def sched50():
    return make_schedule(50)


@pytest.fixture(scope="session")
def dataset():
    return enumerate_dataset()


@pytest.fixture(scope="session")
def predictor(dataset, sched50):
    return EmpiricalNoisePredictor.from_renders(dataset, sched50)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
