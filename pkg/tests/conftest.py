import numpy as np
import pytest

from egoe.ensemble import make_member
from egoe.fock import SpaceSpec

ACCEPTANCE_LINES = []


def record_acceptance(number: int, title: str, passed: bool, detail: str):
    ACCEPTANCE_LINES.append((number, title, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_LINES):
        tag = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{tag}] {number}. {title}: {detail}")


@pytest.fixture(scope="session")
def small_members():
    """Eight members of the N=8, m=4 space (d=70)."""
    return [make_member(SpaceSpec(8, 4), 11, i) for i in range(8)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
