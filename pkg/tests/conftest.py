import pytest

_LINES = []


@pytest.fixture
def criterion_log():
    """Record one summary line per acceptance criterion."""
    def log(number, name, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {name}  [{detail}]"
        _LINES.append(line)
        print(line)
    return log


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
