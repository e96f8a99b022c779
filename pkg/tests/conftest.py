"""Shared pytest plumbing.

The acceptance module records one verdict line per criterion here; the
terminal-summary hook echoes them after the run so the lines are visible
even when output capture is on.
"""

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(num: int, passed: bool, detail: str) -> None:
    verdict = "PASS" if passed else "FAIL"
    ACCEPTANCE_LINES.append(f"criterion {num:2d}: {verdict}  {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
