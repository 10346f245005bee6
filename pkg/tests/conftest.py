import pytest

from dbgen import corpus
from dbgen.analysis import plan_functions

ACCEPTANCE_RESULTS: list[str] = []


@pytest.fixture(scope="session")
def lam():
    return corpus.load("lambda")


@pytest.fixture(scope="session")
def sysf():
    return corpus.load("system_f")


@pytest.fixture(scope="session")
def lam_plan(lam):
    return plan_functions(lam)


@pytest.fixture(scope="session")
def sysf_plan(sysf):
    return plan_functions(sysf)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
