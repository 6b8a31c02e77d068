from __future__ import annotations

import pytest

# acceptance verdicts, printed once at the end of the run
ACCEPTANCE: list = []


def record(criterion: str, ok: bool, detail: str = ""):
    ACCEPTANCE.append((criterion, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        line = f"{'PASS' if ok else 'FAIL'}  {name}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)


@pytest.fixture
def tmp_out(tmp_path):
    return tmp_path / "report.json"
