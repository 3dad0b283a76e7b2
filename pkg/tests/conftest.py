import pytest

# lines recorded by the acceptance tests, echoed at the end of the run
ACCEPTANCE_LINES = []


def record(line):
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def tail_row():
    from subweyl.pipeline import TAIL_ROW_875

    return TAIL_ROW_875
