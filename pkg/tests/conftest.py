import time

import pytest

SUITE_BUDGET_S = 600.0

_criteria: dict[int, tuple[str, str, str]] = {}
_started = [0.0]


class CriterionLog:
    """Collects one verdict per acceptance criterion for the end-of-run table."""

    def record(self, number: int, name: str, status: str, detail: str) -> None:
        _criteria[number] = (name, status, detail)

    def check(self, number: int, name: str, ok: bool, detail: str) -> None:
        self.record(number, name, "PASS" if ok else "FAIL", detail)
        assert ok, f"criterion {number} ({name}) failed: {detail}"


@pytest.fixture(scope="session")
def criteria():
    return CriterionLog()


def pytest_sessionstart(session):
    _started[0] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    elapsed = time.perf_counter() - _started[0]
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_criteria):
            name, status, detail = _criteria[number]
            terminalreporter.write_line(f"[{status}] {number}. {name}: {detail}")
    terminalreporter.write_line(f"suite wall time {elapsed:.1f} s (budget {SUITE_BUDGET_S:.0f} s)")


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _started[0]
    if elapsed > SUITE_BUDGET_S and exitstatus == 0:
        session.exitstatus = 1
