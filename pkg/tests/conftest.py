import pytest

CRITERIA: dict = {}


@pytest.fixture
def record():
    """record(n, passed, detail) stores one acceptance line, printed at the end of the session."""
    def _record(n: int, passed: bool, detail: str):
        line = f"criterion {n}: {'PASS' if passed else 'FAIL'} {detail}"
        CRITERIA[n] = line
        print(line)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[n])
