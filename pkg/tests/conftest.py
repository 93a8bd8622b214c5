import numpy as np
import pytest

# Acceptance tests append "PASS/FAIL criterion N: ..." lines here; the hook
# below echoes them at the end of the pytest run so they survive capture.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(42)
