import pytest

_LINES = []


@pytest.fixture
def verdict():
    """Record one acceptance line; returns ``ok`` so the caller can assert on it."""
    def record(n, name, ok, detail=""):
        line = f"[{n:2d}] {'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
        _LINES.append((n, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_LINES):
            terminalreporter.write_line(line)
