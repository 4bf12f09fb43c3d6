import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dgml.model import DgmlDocument  # noqa: E402
from dgml.repository import Repository  # noqa: E402

DATA = Path(__file__).parent / "data"

_acceptance: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = dict(report.keywords).get("acceptance")
    if marker is None:
        return
    criterion = getattr(report, "criterion", None) or report.nodeid
    verdict = "PASS" if report.passed else "SKIP" if report.skipped else "FAIL"
    _acceptance.append((criterion, verdict))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        outcome.get_result().criterion = marker.kwargs.get("criterion") or item.name


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, verdict in _acceptance:
        terminalreporter.write_line(f"{verdict}  {criterion}")


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def login_text() -> str:
    return (DATA / "login-form.dgml").read_text(encoding="utf-8")


@pytest.fixture
def repo(tmp_path) -> Repository:
    return Repository.init(tmp_path / "repo")


@pytest.fixture
def make_repo(tmp_path):
    """Build a repository holding the given modules, in the given order."""
    counter = [0]

    def build(modules):
        counter[0] += 1
        r = Repository.init(tmp_path / f"repo{counter[0]}")
        for m in modules:
            r.add_module(DgmlDocument(m))
        return r

    return build
