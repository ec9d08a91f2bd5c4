import os

import pytest
from hypothesis import settings

from behavmark.keyed import MasterKey
from behavmark.recombination import BehaviorDistribution

settings.register_profile("ci", max_examples=200, deadline=None)
settings.register_profile("fast", max_examples=20, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

EXAMPLE_BEHAVIORS = ("Search", "Book", "Pay", "Check-in", "Modify")
EXAMPLE_PROBS = (0.40, 0.25, 0.15, 0.12, 0.08)


@pytest.fixture
def ticket_dist():
    return BehaviorDistribution(EXAMPLE_BEHAVIORS, EXAMPLE_PROBS)


@pytest.fixture
def master():
    return MasterKey(bytes(range(32)))


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def report_criterion():
    def record(number: int, passed: bool, detail: str) -> None:
        ACCEPTANCE[number] = (passed, detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} | {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
