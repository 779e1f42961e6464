from __future__ import annotations

import pytest

from protobooth.fixture import install_fixture, synthesize_case_fixture
from protobooth.service import BoothService
from protobooth.store import Repository

_acceptance_results: dict[str, str] = {}


@pytest.fixture(scope="session")
def case():
    """The synthesized demo dataset; synthesized once per run."""
    return synthesize_case_fixture(seed=0)


@pytest.fixture(scope="session")
def case_service(case, tmp_path_factory):
    """A backend with the demo dataset installed. Session-scoped: read-only."""
    repo = Repository(tmp_path_factory.mktemp("case-repo"))
    service = BoothService(repo)
    install_fixture(service, case)
    return service


@pytest.fixture
def service(tmp_path):
    """A fresh, empty backend."""
    return BoothService(Repository(tmp_path / "repo"))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if "test_acceptance.py" in str(item.fspath):
        if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
            _acceptance_results[item.name] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name in sorted(_acceptance_results):
        label = name.removeprefix("test_").replace("_", " ")
        verdict = "PASS" if _acceptance_results[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {label}")
