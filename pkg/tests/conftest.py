import sys
from collections import OrderedDict
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from realmaps.posit import SolverConfig  # noqa: E402

_CRITERIA: "OrderedDict[str, list]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, part): acceptance criterion this test covers")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = next((m for m in getattr(report, "_criterion", []) or []), None)
    if marker is None:
        return
    number, part, title = marker
    _CRITERIA.setdefault(number, []).append((part, title, report.outcome == "passed"))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep._criterion = [(str(m.args[0]), m.args[1] if len(m.args) > 1 else "", m.kwargs.get("title", item.name))]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, parts in sorted(_CRITERIA.items(), key=lambda kv: int(kv[0])):
        ok = all(p[2] for p in parts)
        failed = [f"{p[0]} ({p[1]})" for p in parts if not p[2]]
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}"
        if failed:
            line += "  failing: " + "; ".join(failed)
        tr.write_line(line)


@pytest.fixture
def cfg():
    return SolverConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
