import pytest

from nls_collapse.groundstate import default_ground_state

# one line per acceptance criterion, filled in by test_acceptance
ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def ground():
    return default_ground_state()


@pytest.fixture
def acceptance():
    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
