import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

# one pass/fail line per acceptance criterion, printed after the test run
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
