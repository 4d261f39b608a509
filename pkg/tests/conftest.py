"""Shared fixtures: the synthetic golden hand and its full design run.

The expensive pipeline stages run once per session and are reused by the
module suites and the acceptance suite.
"""
import pytest

from handfab import capture as capture_mod
from handfab import pipeline, synth
from handfab.config import DesignConfig


@pytest.fixture(scope="session")
def cfg():
    return DesignConfig()


@pytest.fixture(scope="session")
def fixture_paths(tmp_path_factory):
    out = tmp_path_factory.mktemp("fixture")
    return synth.write_fixture(str(out))


@pytest.fixture(scope="session")
def left_fixture_paths(tmp_path_factory):
    out = tmp_path_factory.mktemp("fixture_left")
    return synth.write_fixture(str(out), handedness="left")


@pytest.fixture(scope="session")
def hand(fixture_paths, cfg):
    return capture_mod.capture(fixture_paths["image"],
                               fixture_paths["landmarks"], cfg.capture)


@pytest.fixture(scope="session")
def design(hand, cfg):
    return pipeline.design_from_hand(hand, cfg)


# one printed pass/fail line per acceptance criterion, even when the
# individual test output is captured
_CRITERIA = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance" in report.nodeid and report.when == "call" \
            and name.startswith("test_criterion_"):
        num = int(name.split("_")[2])
        label = name.split("_", 3)[-1].replace("_", " ")
        _CRITERIA[num] = (report.outcome, label)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        outcome, label = _CRITERIA[num]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d} {verdict}  {label}")
