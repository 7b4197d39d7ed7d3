import numpy as np
import pytest

from rlpp import trackmodel as tm

ACCEPTANCE_KEY = pytest.StashKey()


@pytest.fixture(scope="session")
def acceptance_lines(request):
    """Shared sink for the acceptance gate's one-line verdicts."""
    return request.config.stash.setdefault(ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def oval():
    return tm.synthetic_oval()


@pytest.fixture(scope="session")
def oval_raceline(oval):
    return tm.centerline_raceline(oval)
