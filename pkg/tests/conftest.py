import pytest

_LINES: list[tuple[str, bool, str]] = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line for the acceptance summary."""

    def record(label: str, passed: bool, detail: str) -> bool:
        _LINES.append((label, bool(passed), detail))
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _LINES:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}")
