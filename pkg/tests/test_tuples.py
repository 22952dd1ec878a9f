from __future__ import annotations

from fractions import Fraction

import pytest

from conftest import words
from localentropy.measures import Bernoulli, Markov, Periodic
from localentropy.subshift import SFT, Cover, EmptyLanguage, Pattern, SymbolicSet, product_sft
from localentropy.tuples import (
    NEGATIVE,
    POSITIVE,
    UNDECIDED,
    DiagonalTuple,
    TupleCandidate,
    admissible_cover,
    combine,
    is_entropy_tuple,
    lambda_n,
    measure_tuple_check,
    pair_cover_separation,
    predict_product,
    product_candidates,
    product_tuple_check,
    refine_candidate,
    upe_check,
)


def cyl(w: str) -> SymbolicSet:
    return SymbolicSet.cylinder(Pattern.word(w))


def test_candidate_validation():
    with pytest.raises(DiagonalTuple):
        TupleCandidate.of_words(["0", "0"])
    with pytest.raises(ValueError):
        TupleCandidate.of_words(["0"])
    with pytest.raises(ValueError):
        TupleCandidate((Pattern.word("0"), Pattern.word("01")), 0)
    c = TupleCandidate.of_words(["01", "10"])
    assert c.r == 1 and c.n == 2
    assert TupleCandidate.from_json(c.to_json()) == c


def test_admissible_cover_full_shift(full2):
    spec = admissible_cover(TupleCandidate.of_words(["0", "1"]), full2)
    lang = full2.language(spec.cover.domain())
    masks = [lang.mask(e) for e in spec.cover]
    assert [m.tolist() for m in masks] == [[False, True], [True, False]]


def test_admissible_cover_golden_mean(golden):
    spec = admissible_cover(TupleCandidate.of_words(["00", "10"]), golden)
    lang = golden.language(spec.cover.domain())
    assert len(lang) == 3 and len(spec.cover) == 2
    for i, w in enumerate(["00", "10"]):
        idx = lang.index(Pattern.word(w))
        assert not lang.mask(spec.cover.elements[i])[idx]
        assert lang.mask(spec.cover.elements[1 - i])[idx]


def test_admissible_cover_rejects_points_outside_language(golden):
    with pytest.raises(EmptyLanguage):
        admissible_cover(TupleCandidate.of_words(["11", "00"]), golden)


def test_admissible_cover_merges_duplicates(full2):
    spec = admissible_cover(TupleCandidate.of_words(["0", "1", "0"]), full2)
    assert len(spec.cover) == 2


def test_refine_candidate_extends_window(full2):
    c = refine_candidate(TupleCandidate.of_words(["0", "1"]), 1, full2)
    assert c.r == 1 and len(c.window) == 3
    assert [p.values[1] for p in c.points] == ["0", "1"]


def test_is_entropy_tuple_full_shift(full2):
    v = is_entropy_tuple(full2, TupleCandidate.of_words(["0", "1"], r=0), r_max=2, tol=0.01)
    assert v.verdict == POSITIVE
    assert [r.r for r in v.resolutions] == [0, 1, 2]


def test_is_entropy_tuple_periodic_is_certified_negative():
    p2 = SFT.periodic_orbit("01")
    v = is_entropy_tuple(p2, TupleCandidate.of_words(["0", "1"], r=0), r_max=2)
    assert v.verdict == NEGATIVE and v.certified


def test_is_entropy_tuple_symmetric(golden):
    a = is_entropy_tuple(golden, TupleCandidate.of_words(["00", "10"]), r_max=1, n_max=6)
    b = is_entropy_tuple(golden, TupleCandidate.of_words(["10", "00"]), r_max=1, n_max=6)
    assert a.verdict == b.verdict
    assert [r.certified_upper for r in a.resolutions] == [r.certified_upper for r in b.resolutions]


def test_combine_rules():
    assert combine([POSITIVE, POSITIVE]) == POSITIVE
    assert combine([POSITIVE, NEGATIVE]) == NEGATIVE
    assert combine([POSITIVE, UNDECIDED]) == UNDECIDED


def test_upe_check():
    assert upe_check(SFT.golden_mean(), 1).verdict == "UPE_EVIDENCE"
    rep = upe_check(SFT.periodic_orbit("01"), 1)
    assert rep.verdict == "REFUTED"
    assert sorted("".join(p.values) for p in rep.witness) == ["010", "101"]


def test_lambda_examples():
    assert lambda_n(Bernoulli.binary("1/2"), 2).mass([cyl("0"), cyl("1")]) == Fraction(1, 4)
    assert lambda_n(Bernoulli.binary("1/3"), 3).mass([cyl("0"), cyl("0"), cyl("1")]) == Fraction(2, 27)
    assert lambda_n(Periodic.word("01"), 2).mass([cyl("0"), cyl("1")]) == 0
    assert lambda_n(Periodic.word("01"), 2).mass([cyl("0"), cyl("01")]) == Fraction(1, 2)
    with pytest.raises(ValueError):
        lambda_n(Markov.golden_mean(0.4), 2)


def test_measure_tuple_check(full2):
    U = admissible_cover(TupleCandidate.of_words(["0", "1"]), full2).cover
    rep = measure_tuple_check(Bernoulli.binary("1/2"), U, full2)
    assert rep.lambda_positive and rep.entropy_positive and rep.agree
    rep = measure_tuple_check(Periodic.word("01"), U, full2)
    assert not rep.lambda_positive and rep.entropy_positive is False and rep.agree


def test_measure_tuple_check_flags_degenerate(full2):
    U = Cover((SymbolicSet.full(1), cyl("0")))
    rep = measure_tuple_check(Bernoulli.binary("1/2"), U, full2, n_max=4)
    assert rep.degenerate == [0] and rep.lambda_mass == 0 and rep.agree is None


def test_predict_product_table():
    assert predict_product(POSITIVE, POSITIVE) == POSITIVE
    assert predict_product(POSITIVE, "SUPPORT") == POSITIVE
    assert predict_product("SUPPORT", POSITIVE) == POSITIVE
    assert predict_product(NEGATIVE, NEGATIVE) == NEGATIVE
    assert predict_product("SUPPORT", NEGATIVE) == NEGATIVE
    assert predict_product(POSITIVE, "OFF_SUPPORT") == NEGATIVE


def test_product_check_examples(full2):
    p2 = SFT.periodic_orbit("01")
    for a, b in ((full2, full2), (full2, p2), (p2, p2)):
        rep = product_tuple_check(a, b)
        assert rep.disagreements == 0 and rep.decided > 0
    rep = product_tuple_check(p2, p2)
    assert all(r["predicted"] == NEGATIVE for r in rep.rows)


def test_product_candidates_sampling_is_seeded(full2):
    prod = product_sft(full2, full2)
    a = product_candidates(prod, length=2, sample=10, seed=3)
    b = product_candidates(prod, length=2, sample=10, seed=3)
    assert a == b and len(a) == 10


def test_pair_cover_separation(full2):
    assert pair_cover_separation(cyl("1"), cyl("0"), [1, 2, 3, 4], full2) == (1, 2)
    assert pair_cover_separation(SymbolicSet.empty(), cyl("0"), [1, 2, 3, 4], full2) is None
    assert pair_cover_separation(cyl("1"), cyl("0"), [1, 2, 3, 4], SFT.periodic_orbit("01")) is None
    with pytest.raises(ValueError):
        pair_cover_separation(cyl("1"), cyl("0"), [1, 1], full2)
