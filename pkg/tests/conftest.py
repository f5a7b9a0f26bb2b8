"""Shared pytest plumbing: the acceptance-criteria report section."""

ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    """Stash one pass/fail line for the end-of-run summary."""
    status = "PASS" if ok else "FAIL"
    ACCEPTANCE_LINES.append(f"criterion {number:>2}: {status}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
