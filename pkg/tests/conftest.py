"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""
import re

_CRITERIA = {}


def pytest_runtest_logreport(report):
    match = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not match or report.when != "call" and report.passed:
        return
    key = (int(match.group(1)), match.group(2))
    prev = _CRITERIA.get(key, ("PASS", 0.0))
    status = "PASS" if report.passed and prev[0] == "PASS" else "FAIL"
    _CRITERIA[key] = (status, prev[1] + report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (number, name), (status, seconds) in sorted(_CRITERIA.items()):
        terminalreporter.write_line(f"criterion {number} ({name}): {status}  [{seconds:.2f} s]")
