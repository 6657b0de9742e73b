import pytest

_LINES = {}


@pytest.fixture
def criterion():
    """``criterion(n, ok, detail)`` records one acceptance line and returns ``ok``."""
    def record(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        _LINES[n] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_LINES):
            terminalreporter.write_line(_LINES[n])
