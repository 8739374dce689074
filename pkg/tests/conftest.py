import pytest

_LINES: dict[int, str] = {}


@pytest.fixture
def report():
    """Record one verdict line per acceptance criterion."""

    def rec(n: int, ok: bool, detail: str = "") -> bool:
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        _LINES[n] = line
        print(line)
        return ok

    return rec


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_LINES):
            terminalreporter.write_line(_LINES[n])
