"""Collects acceptance outcomes and prints one line per criterion at the end of a run."""

import re

import pytest

_DETAILS = {}
_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


@pytest.fixture
def record_criterion(request):
    """``record_criterion(text)`` attaches a one-line measurement to the current criterion."""
    match = _CRITERION.search(request.node.nodeid)

    def record(text):
        if match:
            _DETAILS[int(match.group(1))] = text

    return record


def pytest_terminal_summary(terminalreporter):
    outcomes = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            match = _CRITERION.search(getattr(rep, "nodeid", ""))
            if not match:
                continue
            n = int(match.group(1))
            ok = status == "passed"
            outcomes[n] = outcomes.get(n, True) and ok
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(outcomes):
        detail = _DETAILS.get(n, "")
        line = f"criterion {n}: {'PASS' if outcomes[n] else 'FAIL'}"
        terminalreporter.write_line(f"{line}  {detail}".rstrip())
