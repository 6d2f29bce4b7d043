import os
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"

# Set SEPBN_UPDATE_GOLDEN=1 to rewrite golden files from the current output.
UPDATE_GOLDEN = os.environ.get("SEPBN_UPDATE_GOLDEN") == "1"

ACCEPTANCE_RESULTS = {}


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def golden():
    def check(name, text):
        path = GOLDEN / name
        if UPDATE_GOLDEN:
            path.write_text(text, encoding="utf-8")
        assert path.exists(), f"missing golden file {name}"
        assert text == path.read_text(encoding="utf-8"), f"output differs from golden {name}"
    return check


@pytest.fixture
def criterion(request):
    """Record a pass/fail line for an acceptance criterion."""
    label = request.node.get_closest_marker("criterion").args[0]
    ACCEPTANCE_RESULTS[label] = "FAIL"
    yield
    ACCEPTANCE_RESULTS[label] = "PASS" if not _failed(request.node) else "FAIL"


def _failed(node):
    rep = getattr(node, "rep_call", None)
    return rep is None or rep.failed


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE_RESULTS, key=lambda s: int(s.split(".")[0])):
        terminalreporter.write_line(f"[{ACCEPTANCE_RESULTS[label]}] {label}")
