"""Shared acceptance-report plumbing.

Acceptance tests record one line per criterion; the summary hook prints
them after the run so the verdicts survive in plain pytest output.
"""

import pytest


class AcceptanceLog:
    def __init__(self):
        self.records = {}

    def record(self, index, name, passed, detail=""):
        self.records[index] = (name, bool(passed), detail)


_LOG = AcceptanceLog()


@pytest.fixture(scope="session")
def acceptance_log():
    return _LOG


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _LOG.records:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for index in sorted(_LOG.records):
        name, passed, detail = _LOG.records[index]
        status = "PASS" if passed else "FAIL"
        line = f"criterion {index:02d} [{status}] {name}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
