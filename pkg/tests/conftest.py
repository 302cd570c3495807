"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

import re

import pytest

_OUTCOMES = {}
_DETAILS = {}


def _criterion(nodeid):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", nodeid)
    return int(m.group(1)) if m else None


@pytest.fixture
def acceptance(request):
    """Per-criterion detail sink: ``acceptance("max residual 3e-15")``."""
    n = _criterion(request.node.nodeid)

    def note(text):
        _DETAILS.setdefault(n, []).append(text)

    return note


def pytest_runtest_logreport(report):
    n = _criterion(report.nodeid)
    if n is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        ok = report.outcome == "passed"
        _OUTCOMES[n] = _OUTCOMES.get(n, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_OUTCOMES):
        status = "PASS" if _OUTCOMES[n] else "FAIL"
        detail = "; ".join(_DETAILS.get(n, []))
        terminalreporter.write_line(f"criterion {n}: {status}" + (f"  ({detail})" if detail else ""))
