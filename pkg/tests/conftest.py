from __future__ import annotations

import sys

import pytest

from localentropy.group import FolnerSequence
from localentropy.measures import Bernoulli
from localentropy.subshift import SFT, Pattern, SymbolicSet


def words(*ws: str, start: int = 0) -> SymbolicSet:
    """The union of the cylinders of the given words placed at ``start``."""
    return SymbolicSet.union_of([Pattern.word(w, start) for w in ws])


@pytest.fixture
def full2():
    return SFT.full_shift(2)


@pytest.fixture
def golden():
    return SFT.golden_mean()


@pytest.fixture
def orbit2():
    return SFT.periodic_orbit("01")


@pytest.fixture
def box():
    return FolnerSequence("box", 1)


@pytest.fixture
def fair():
    return Bernoulli.binary("1/2")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
