from __future__ import annotations

from functools import lru_cache

import pytest

from fluxon import bohr_sommerfeld, make_sech_profile
from fluxon import modulation as md

# criterion number -> (passed, detail), filled by the acceptance tests
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


@lru_cache(maxsize=None)
def sech(A: float):
    return make_sech_profile(A)


@lru_cache(maxsize=None)
def scattering(A: float, N: int):
    return bohr_sommerfeld(sech(A), N)


@lru_cache(maxsize=None)
def column(A: float, x: float, ts: tuple[float, ...]):
    """Modulation states along one x-column, shared across test modules."""
    return tuple(md.continue_column(sech(A), x, ts))


def state_at(A: float, x: float, t: float):
    return column(A, x, (t,))[-1]


@pytest.fixture(scope="session")
def p34():
    return sech(0.75)


@pytest.fixture(scope="session")
def p14():
    return sech(0.25)


@pytest.fixture
def record():
    """Store a criterion's outcome so the terminal summary can print one line per criterion."""
    def _record(number: int, passed: bool, detail: str) -> None:
        ACCEPTANCE_RESULTS[number] = (bool(passed), detail)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
