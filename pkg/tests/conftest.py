import pytest

from ntoslab.model import ChainParams


@pytest.fixture
def pg_params():
    return ChainParams(2.5, 2.8, 1.0, 1e-5, 1e-5)


@pytest.fixture
def lg_params():
    return ChainParams(2.8, 1.5, 1.0, 1e-5, 1e-5)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import REPORT

    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
