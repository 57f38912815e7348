"""Shared pytest plumbing: collect the acceptance criteria's PASS/FAIL lines
and echo them in the terminal summary, so every run shows one line per
criterion regardless of capture settings."""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
