"""Shared pytest hooks for the suite.

Collects the one-line acceptance verdicts emitted by test_acceptance and
prints them as a dedicated section after the run, so the gate's outcome
is visible even when stdout capture swallows in-test prints.
"""

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
