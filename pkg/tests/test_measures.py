from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import words
from localentropy.group import FiniteSubset
from localentropy.measures import (
    Bernoulli,
    Empirical,
    EmpiricalSpec,
    Markov,
    Periodic,
    UnsupportedMeasure,
    as_number,
    convex_combine,
    invariance_defect,
    measure_from_json,
    phi,
    set_mass,
)
from localentropy.subshift import SFT, Pattern, SymbolicSet, WindowTooSmall

I = FiniteSubset.interval


def test_as_number_and_phi():
    assert as_number("1/3") == Fraction(1, 3)
    assert as_number(0.25) == 0.25
    assert phi(0.0) == 0.0 and phi(1.0) == 0.0
    assert phi(0.5) == pytest.approx(0.5 * math.log(2))


def test_cylinder_mass_examples():
    assert Bernoulli.binary("1/2").cylinder_mass(Pattern.word("01")) == Fraction(1, 4)
    mk = Markov(("0", "1"), [["1/2", "1/2"], [1, 0]], ["2/3", "1/3"])
    assert mk.cylinder_mass(Pattern.word("11")) == 0
    assert mk.cylinder_mass(Pattern.word("01")) == Fraction(1, 3)
    assert Periodic.word("01").cylinder_mass(Pattern.word("0")) == Fraction(1, 2)


def test_markov_stationary_and_ergodicity():
    mk = Markov.golden_mean("1/3")
    assert mk.pi == [Fraction(3, 4), Fraction(1, 4)]
    assert mk.ergodic
    reducible = Markov(("0", "1"), [[1, 0], [0, 1]], [Fraction(1, 2), Fraction(1, 2)])
    assert not reducible.ergodic
    with pytest.raises(ValueError):
        Markov(("0", "1"), [[1, 0], [0, 1]], [Fraction(1, 3), Fraction(1, 3)])


def test_markov_entropy_rate_and_parry():
    p = Markov.parry_parameter()
    golden = (1 + 5**0.5) / 2
    assert p == pytest.approx(1 / golden**2)
    assert Markov.golden_mean(p).entropy_rate() == pytest.approx(math.log(golden), abs=1e-12)


def test_window_masses_sum_to_one(golden):
    lang = golden.language(I(0, 6))
    for mu in (Markov.golden_mean("1/4"), Markov.golden_mean(0.4), Periodic.word("01")):
        assert mu.masses(lang).sum() == pytest.approx(1.0, abs=1e-12)
    full = SFT.full_shift(3)
    m = Bernoulli({"0": "1/6", "1": "1/3", "2": "1/2"}).masses(full.language(I(0, 4)))
    assert m.sum() == pytest.approx(1.0, abs=1e-12)


def test_vectorised_masses_match_exact(golden):
    mu = Markov.golden_mean("2/5")
    lang = golden.language(I(0, 5))
    exact = [float(mu.cylinder_mass(p)) for p in lang.patterns()]
    assert np.allclose(mu.masses(lang), exact, atol=1e-15)


def test_bernoulli_validation():
    with pytest.raises(ValueError):
        Bernoulli({"0": "1/2", "1": "1/3"})
    with pytest.raises(ValueError):
        Bernoulli({"0": -0.5, "1": 1.5})


def test_set_mass_examples(full2):
    mu = Bernoulli.binary("1/3")
    W = I(0, 2)
    assert set_mass(mu, SymbolicSet.full(1), W, full2) == pytest.approx(1.0)
    assert set_mass(mu, SymbolicSet.empty(1), W, full2) == 0.0
    assert set_mass(mu, words("0", "1"), W, full2) == pytest.approx(1.0)
    with pytest.raises(WindowTooSmall):
        set_mass(mu, words("000"), W, full2)


def test_convex_combine_examples():
    a, b = Bernoulli.binary("1/2"), Bernoulli.binary("1/4")
    assert convex_combine(1, a, b) is a
    assert convex_combine(0, a, b) is b
    mix = convex_combine("1/2", a, b)
    assert mix.cylinder_mass(Pattern.word("0")) == Fraction(3, 8)
    assert not mix.ergodic


def test_empirical_examples():
    F = I(0, 4)
    zeros = Pattern.word("0" * 8)
    ones = Pattern.word("1" * 8)
    assert Empirical(EmpiricalSpec([zeros], F)).cylinder_mass(Pattern.word("0")) == 1
    assert Empirical(EmpiricalSpec([zeros, ones], F)).cylinder_mass(Pattern.word("0")) == Fraction(1, 2)
    alt = Empirical(EmpiricalSpec([Pattern.word("01" * 4)], I(0, 2)))
    assert alt.cylinder_mass(Pattern.word("0")) == Fraction(1, 2)
    with pytest.raises(WindowTooSmall):
        Empirical(EmpiricalSpec([zeros], I(0, 8))).cylinder_mass(Pattern.word("00"))


def test_invariance_defect(full2):
    assert invariance_defect(Bernoulli.binary("1/3"), words("01"), (1,), I(0, 4), full2) == 0
    x = Pattern.word("0110100110010110" * 2)
    n = 16
    emp = Empirical(EmpiricalSpec([x], I(0, n)))
    U = words("01")
    d = invariance_defect(emp, U, (1,), I(0, 3), SFT.full_shift(2))
    assert d <= 2 * 2 / n + 1e-12
    fixed = Empirical(EmpiricalSpec([Pattern.word("0" * 10)], I(0, 4)))
    assert invariance_defect(fixed, words("0"), (1,), I(0, 2), full2) == 0


def test_json_round_trip():
    for mu in (Bernoulli.binary("1/3"), Markov.golden_mean("1/2"), Periodic.word("011")):
        again = measure_from_json(mu.to_json())
        assert again.to_json() == mu.to_json()
    with pytest.raises(ValueError):
        measure_from_json({"variant": "gibbs"})


def test_unsupported_measure_is_value_error():
    assert issubclass(UnsupportedMeasure, ValueError)
