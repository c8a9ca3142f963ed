import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
EXAMPLE_PLAN = ROOT / "plans" / "example.json"

sys.path.insert(0, str(Path(__file__).resolve().parent))

_criteria: list[tuple[str, str]] = []


@pytest.fixture(scope="session")
def example_plan_path():
    return EXAMPLE_PLAN


@pytest.fixture(scope="session")
def example_plan():
    from satqos.testplan import load_plan

    return load_plan(EXAMPLE_PLAN)


@pytest.fixture
def criterion(request):
    """Record an acceptance criterion's outcome for the terminal summary."""
    label = request.node.get_closest_marker("criterion").args[0]
    callspec = getattr(request.node, "callspec", None)
    if callspec is not None:
        label += f" [{callspec.id}]"
    yield
    rep = getattr(request.node, "rep_call", None)
    passed = rep is not None and rep.passed
    _criteria.append((label, "PASS" if passed else "FAIL"))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label, status in _criteria:
        terminalreporter.write_line(f"{status}  {label}")
