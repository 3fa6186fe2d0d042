import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def hash_vectors():
    return json.loads((FIXTURES / "hash32_vectors.json").read_text())


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion")
    config._acceptance = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        item.config._acceptance.append((*marker.args, report.outcome, item.name))


def pytest_terminal_summary(terminalreporter, config):
    results = getattr(config, "_acceptance", [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome, name in sorted(results):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title} ({name})")
