import pytest

_LINES = []


@pytest.fixture
def criterion():
    """``criterion(number, title, ok, detail)`` records one PASS/FAIL line and asserts ``ok``."""
    def record(number, title, ok, detail=""):
        line = f"criterion {number:>2} {title}: {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f" ({detail})"
        _LINES.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
