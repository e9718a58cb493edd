import sys
from collections import OrderedDict
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"

CRITERIA = OrderedDict([
    (1, "source filter matches the hand-labeled fixture"),
    (2, "target filter keeps no opposite-gender target"),
    (3, "balance sizes and seed determinism"),
    (4, "recall gap vs F1 gap separation (Model A/B)"),
    (5, "metrics equal a brute-force recount"),
    (6, "IBM Model 1 likelihood, toy table, one-step oracle"),
    (7, "end-to-end pipeline vs oracle, worker invariance"),
    (8, "mini WinoMT protocol with a scripted translator"),
    (9, "MuST-SHE delta-accuracy antisymmetry"),
    (10, "human label mapping, 15 cases"),
])

_outcomes: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def pytest_runtest_logreport(report):
    n = getattr(report, "criterion", None)
    if n is None:
        return
    if report.when == "call" or report.outcome != "passed":
        ok = report.outcome == "passed"
        prev = _outcomes.get(n, True)
        _outcomes[n] = prev and ok


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        rep.criterion = mark.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, name in CRITERIA.items():
        if n not in _outcomes:
            continue
        status = "PASS" if _outcomes[n] else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {n:>2}: {name}")
