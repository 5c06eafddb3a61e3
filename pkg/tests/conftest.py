"""Collects acceptance outcomes and prints one line per criterion after the run."""
import re

ACCEPTANCE = {}
_DETAILS = {}
_NODE = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def record(number: int, detail: str):
    """Attach a one-line summary to an acceptance criterion (shown whether it passes or not)."""
    _DETAILS[number] = detail


def pytest_runtest_logreport(report):
    m = _NODE.search(report.nodeid)
    if not m:
        return
    k = int(m.group(1))
    if report.when == "call" or (report.when == "setup" and report.failed):
        ACCEPTANCE[k] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {k:>2}: {ACCEPTANCE[k]}  {_DETAILS.get(k, '')}")
