"""Shared pytest plumbing: the acceptance suite reports one line per
criterion through the `acceptance_report` fixture, and those lines are
replayed in the terminal summary so they stay visible regardless of
output capture."""

import pytest

_LINES = []


@pytest.fixture(scope="session")
def acceptance_report():
    def report(number, name, ok, detail):
        line = f"ACCEPTANCE {number} {name}: {'PASS' if ok else 'FAIL'} ({detail})"
        _LINES.append(line)
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance summary")
    for line in sorted(_LINES):
        terminalreporter.write_line(line)
