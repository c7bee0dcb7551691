import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import synth  # noqa: E402

_CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Register the test as an acceptance criterion; outcome is reported at the end."""
    def register(label):
        _CRITERIA[request.node.nodeid] = label
    return register


def pytest_runtest_logreport(report):
    if report.nodeid in _CRITERIA and report.when == "call":
        _CRITERIA[report.nodeid] = (_CRITERIA[report.nodeid], report.outcome)
    elif report.nodeid in _CRITERIA and report.failed:
        _CRITERIA[report.nodeid] = (_CRITERIA[report.nodeid], "failed")


def pytest_terminal_summary(terminalreporter):
    done = [v for v in _CRITERIA.values() if isinstance(v, tuple)]
    if not done:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome in sorted(done):
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{mark}] {label}")


@pytest.fixture(scope="session")
def synthetic_csv(tmp_path_factory):
    return synth.write_csv(tmp_path_factory.mktemp("data") / "synthetic.csv")
