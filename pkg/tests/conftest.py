"""Shared pytest hooks: per-criterion summary lines for the acceptance suite."""

import re

_CRITERION = re.compile(r"test_criterion_(\d+)")
_results = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m or report.when != "call":
        return
    detail = dict(report.user_properties).get("detail", "")
    _results[int(m.group(1))] = (report.outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        outcome, detail = _results[num]
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"criterion {num}: {status}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
