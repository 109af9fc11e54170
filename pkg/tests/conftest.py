"""Shared test plumbing: the acceptance-criteria result board.

Acceptance tests call :func:`record_acceptance` before asserting, so the
terminal summary always carries one PASS/FAIL line per criterion even
when a criterion fails half-way through its assertions.
"""

_ACCEPTANCE: list = []


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    _ACCEPTANCE.append((number, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(_ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {status} — {detail}")
