from __future__ import annotations

import pytest

from localentropy.group import FiniteSubset
from localentropy.tiling import (
    DisjointnessFailure,
    PreconditionError,
    choose_tiling_parameters,
    epsilon_disjoint_check,
    even_cover_translates,
    quasi_tile,
    select_disjoint_subcover,
    verify_quasi_tiling,
)

I = FiniteSubset.interval


def test_epsilon_disjoint_examples():
    w = epsilon_disjoint_check([I(0, 10), I(10, 20)], 0.1)
    assert w and w.cores == (I(0, 10), I(10, 20))
    w = epsilon_disjoint_check([I(0, 10), I(9, 19)], 0.2)
    assert w.cores[1] == I(10, 19)
    assert w.ratios() == pytest.approx([1.0, 0.9])
    f = epsilon_disjoint_check([I(0, 10), I(0, 10)], 0.5)
    assert isinstance(f, DisjointnessFailure) and not f
    assert f.index == 1 and f.ratio == 0


def test_witness_invariants():
    w = epsilon_disjoint_check([I(0, 10), I(8, 20), I(19, 30)], 0.25)
    for a, b in zip(w.members, w.cores):
        assert b.issubset(a) and len(b) > 0.75 * len(a)
    for i in range(len(w.cores)):
        for j in range(i + 1, len(w.cores)):
            assert not (w.cores[i] & w.cores[j])


def test_even_cover_examples():
    w = even_cover_translates(I(0, 10), I(0, 100), 0.25)
    assert [g[0] for g in w.offsets] == list(range(91))
    assert w.multiplicity_bound == 10 and w.total_size == 910
    assert max(w.multiplicity().values()) <= 10
    single = even_cover_translates(FiniteSubset.singleton((0,)), I(3, 9), 0.5)
    assert single.total_size == 6 and single.multiplicity_bound == 1
    sq = even_cover_translates(FiniteSubset.cube(2, 2), FiniteSubset.cube(10, 2), 0.5)
    assert len(sq.offsets) == 81 and sq.multiplicity_bound == 4


def test_even_cover_precondition():
    with pytest.raises(PreconditionError) as exc:
        even_cover_translates(I(0, 10), I(0, 12), 0.1)
    assert exc.value.ratio is not None


def test_select_disjoint_subcover_examples():
    ev = even_cover_translates(I(0, 10), I(0, 100), 0.25)
    w = select_disjoint_subcover(ev, I(0, 100), 0.2, 0.25)
    assert len(w.union()) >= 0.2 * 0.75 * 100
    assert [m.sorted()[0][0] for m in w.members] == list(range(0, 91, 9))
    A = I(0, 20)
    assert select_disjoint_subcover([A], A, 0.3, 0.0).union() == A.elements
    parts = [I(0, 5), I(5, 12), I(12, 20)]
    assert len(select_disjoint_subcover(parts, A, 0.3, 0.0).members) == 3


def test_choose_tiling_parameters():
    k, delta = choose_tiling_parameters(0.2)
    assert k == 16 and 0.9**16 < 0.2 <= 0.9**15
    k, delta = choose_tiling_parameters(0.24)
    assert (1 - 0.12) ** k < 0.24 <= (1 - 0.12) ** (k - 1)
    assert 6**k * delta < 0.12
    with pytest.raises(ValueError):
        choose_tiling_parameters(0.3)


def test_quasi_tile_interval_example():
    # a translate is admitted once more than 8 of its 10 points are unclaimed,
    # so consecutive tiles overlap in one point
    q = quasi_tile([I(0, 10)], I(0, 1000), 0.2)
    assert sorted(c[0] for c in q.centers[0]) == list(range(0, 991, 9))
    assert q.coverage == 1.0 and q.ok and verify_quasi_tiling(q) == []


def test_quasi_tile_singletons():
    target = I(-5, 5)
    q = quasi_tile([FiniteSubset.singleton((0,))], target, 0.1)
    assert q.centers[0] == target and q.coverage == 1.0


def test_quasi_tile_two_dimensional_example():
    shapes = [FiniteSubset.cube(5, 2), FiniteSubset.cube(20, 2)]
    q = quasi_tile(shapes, FiniteSubset.cube(200, 2), 0.2)
    assert q.ok and q.coverage >= 0.8 and verify_quasi_tiling(q) == []


def test_quasi_tile_reports_shortfall():
    q = quasi_tile([I(0, 10)], I(0, 15), 0.1)
    assert not q.ok and q.problems
