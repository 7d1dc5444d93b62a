"""Shared fixtures and the acceptance report printed at the end of the run."""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=_criterion_order):
        terminalreporter.write_line(line)


def _criterion_order(line: str):
    tag = line.split()[1]
    return (0, int(tag)) if tag.isdigit() else (1, tag)
