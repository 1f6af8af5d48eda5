import pytest

import _fixtures
from botgan import dataio

@pytest.fixture(scope="session")
def synth_fixture():
    return _fixtures.synth_split()


@pytest.fixture(scope="session")
def conventional_bundle():
    return _fixtures.conventional()


@pytest.fixture
def small_data():
    return dataio.synth_generate(dataio.SynthConfig(n_rows=240, n_features=6, seed=5))


def pytest_terminal_summary(terminalreporter):
    if _fixtures.ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _fixtures.ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
