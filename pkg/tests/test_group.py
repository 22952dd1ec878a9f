from __future__ import annotations

import pytest

from localentropy.group import (
    DimensionMismatch,
    FiniteSubset,
    FolnerSequence,
    boundary,
    bracket_invariant,
    folner,
    identity,
    inverse,
    inverse_set,
    invariance_ratio,
    multiply,
    set_product,
)



def Z(points, d: int) -> FiniteSubset:
    return FiniteSubset.of([p if isinstance(p, tuple) else (p,) for p in points], d)


def brute_boundary(A: FiniteSubset, K: FiniteSubset) -> set:
    cands = set_product(inverse_set(K), A)
    out = set()
    for g in cands:
        Kg = {multiply(k, g) for k in K}
        if Kg & A.elements and Kg - A.elements:
            out.add(g)
    return out


def test_multiply_examples():
    assert multiply((1, 2), (3, -1)) == (4, 1)
    g = (5, -7)
    assert multiply(g, identity(2)) == g
    assert multiply(g, inverse(g)) == identity(2)


def test_multiply_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        multiply((1,), (1, 2))


def test_set_product_examples():
    assert set_product(Z([0, 1], 1), Z([0, 10], 1)) == Z([0, 1, 10, 11], 1)
    F = Z([3, 7], 1)
    assert set_product(Z([0], 1), F) == F
    assert set_product(Z([0, 1], 1), Z([0, 1], 1)) == Z([0, 1, 2], 1)
    with pytest.raises(DimensionMismatch):
        set_product(Z([0], 1), Z([(0, 0)], 2))


def test_inverse_set_examples():
    assert inverse_set(Z([0, 1, 2], 1)) == Z([0, -1, -2], 1)
    assert inverse_set(Z([(0, 0)], 2)) == Z([(0, 0)], 2)
    assert inverse_set(Z([(1, 0), (0, 1)], 2)) == Z([(-1, 0), (0, -1)], 2)


def test_boundary_examples():
    A = FiniteSubset.interval(0, 10)
    assert boundary(A, Z([0, 1], 1)) == Z([-1, 9], 1)
    assert not boundary(A, Z([0], 1))
    B = FiniteSubset.cube(6, 2)
    K = Z([(0, 0), (1, 0), (0, 1)], 2)
    assert boundary(B, K).elements == brute_boundary(B, K)


def test_invariance_ratio_examples():
    assert invariance_ratio(FiniteSubset.interval(0, 10), Z([0, 1], 1)).ratio == pytest.approx(0.2)
    assert invariance_ratio(FiniteSubset.interval(0, 10), Z([0], 1)).ratio == 0
    assert invariance_ratio(FiniteSubset.interval(0, 100), Z([0, 1], 1)).ratio == pytest.approx(0.02)


def test_bracket_invariant_examples():
    assert bracket_invariant(FiniteSubset.interval(0, 100), Z([0, 1], 1), 0.05)
    assert bracket_invariant(FiniteSubset.interval(0, 7), Z([0], 1), 0.3)
    assert not bracket_invariant(Z([0], 1), Z([0, 1], 1), 0.5)


def test_folner_examples():
    assert folner(FolnerSequence("box", 1), 3) == Z([0, 1, 2], 1)
    assert folner(FolnerSequence("shifted_interval", 1, (0, 0, 1)), 2) == Z([4, 5], 1)
    assert folner(FolnerSequence("box", 2), 2) == FiniteSubset.box((0, 0), (2, 2))
    with pytest.raises(ValueError):
        FolnerSequence("spiral", 1)


def test_folner_sequences_are_folner():
    K = Z([-1, 0, 1], 1)
    ratios = [invariance_ratio(folner(FolnerSequence("shifted_interval", 1, (0, 0, 1)), n), K).ratio for n in (5, 50, 500)]
    assert ratios == sorted(ratios, reverse=True)
    assert ratios[-1] < 0.01


def test_folner_json_round_trip():
    seq = FolnerSequence("shifted_interval", 1, (1, 2))
    assert FolnerSequence.from_json(seq.to_json()) == seq
