from pathlib import Path

import pytest

from actionlogic import actionlang, sitcalc

DATA = Path(__file__).resolve().parent.parent / "demos" / "data"

CRITERIA = {
    1: "golden progression and regression (Go-out)",
    2: "two-slice theory and relation golden",
    3: "successor state axiom golden",
    4: "STRIPS progression with a derived fluent",
    5: "update goldens and exhaustive postulates",
    6: "representation theorem round trip",
    7: "symbolic versus enumerated operations on random domains",
    8: "strong versus weak regression over all small relations",
    9: "stochastic progression and filtering",
    10: "survival persistence and networks",
    11: "successor state axioms versus simulation",
}

_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion covered by the test")


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    failed = report.failed or (report.when == "call" and report.skipped)
    _outcomes[crit] = _outcomes.get(crit, True) and not failed


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        if n not in _outcomes:
            continue
        verdict = "PASS" if _outcomes[n] else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {n:2d} {verdict}  {CRITERIA[n]}")


@pytest.fixture(scope="session")
def goout():
    return actionlang.parse_domain((DATA / "goout.dom").read_text())


@pytest.fixture(scope="session")
def toggle():
    return actionlang.parse_domain((DATA / "toggle.dom").read_text())


@pytest.fixture(scope="session")
def toggle_ssa():
    return sitcalc.parse_ssa_theory((DATA / "toggle.ssa").read_text())
