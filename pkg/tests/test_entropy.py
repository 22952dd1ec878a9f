from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import words
from localentropy.entropy import (
    conditional,
    empirical_vp_measure,
    h_mu_cover,
    h_mu_minus_cover,
    h_mu_partition,
    h_top,
    katok_b,
    katok_entropy,
    min_subcover,
    separated_set,
    shannon,
    static_cover_entropy,
    vp_check,
)
from localentropy.group import FiniteSubset, FolnerSequence
from localentropy.measures import Bernoulli, Markov, Periodic, phi
from localentropy.subshift import Cover, Partition, SymbolicSet, atoms, cover_pullback, symbol_partition

I = FiniteSubset.interval
LOG2 = math.log(2)
GOLDEN = math.log((1 + 5**0.5) / 2)


def fib_words(n: int) -> int:
    a, b = 2, 3
    for _ in range(n - 1):
        a, b = b, a + b
    return a


def sym(sft):
    return symbol_partition(sft.alphabet)


def test_min_subcover_examples(full2, golden):
    assert min_subcover(sym(full2), I(0, 1), full2).N == 2
    assert min_subcover(Cover((SymbolicSet.full(1), words("0"))), I(0, 1), full2).N == 1
    UF = cover_pullback(sym(golden), I(0, 5), golden)
    assert min_subcover(UF, I(0, 5), golden).N == 13 == len(golden.language(I(0, 5)))
    with pytest.raises(ValueError, match="uncovered"):
        min_subcover(Cover((words("0"),)), I(0, 1), full2)


def test_h_top_examples(full2, golden, box):
    est = h_top(full2, sym(full2), box, 8)
    assert est.values == pytest.approx([LOG2] * 8) and est.exact
    g = h_top(golden, sym(golden), box, 14)
    for n in range(1, 15):
        assert g.value_at(n) == pytest.approx(math.log(fib_words(n)) / n, abs=1e-12)
    assert g.certified_upper == pytest.approx(GOLDEN, abs=1e-12)
    assert g.running_infimum() == sorted(g.running_infimum(), reverse=True)
    triv = h_top(full2, Cover.trivial(), box, 4)
    assert triv.values == [0.0] * 4 and triv.certified_upper == 0.0


def test_h_top_values_bounded(full2, box):
    U = Cover((words("0", "11"), words("1")))
    est = h_top(full2, U, box, 8)
    assert all(0 <= v <= LOG2 + 1e-12 for v in est.values)


def test_shannon_examples(full2):
    W = I(0, 1)
    assert shannon(Bernoulli.binary("1/2"), sym(full2), W, full2) == pytest.approx(LOG2)
    assert shannon(Bernoulli.binary("1/2"), Partition((SymbolicSet.full(1),)), W, full2) == 0
    third = shannon(Bernoulli.binary("1/3"), sym(full2), W, full2)
    assert third == pytest.approx(math.log(3) / 3 + 2 / 3 * math.log(1.5))


def test_conditional_examples(full2):
    mu = Bernoulli.binary("1/3")
    a = sym(full2)
    b = symbol_partition(full2.alphabet, at=(1,))
    W = I(0, 2)
    trivial = Partition((SymbolicSet.full(1),))
    assert conditional(mu, a, trivial, W, full2) == pytest.approx(shannon(mu, a, W, full2))
    assert conditional(mu, a, a, W, full2) == pytest.approx(0, abs=1e-12)
    assert conditional(mu, a, b, W, full2) == pytest.approx(shannon(mu, a, W, full2))


def test_static_cover_entropy_examples(full2):
    mu = Bernoulli.binary("1/2")
    W = I(0, 1)
    r = static_cover_entropy(mu, sym(full2), W, full2)
    assert r.value == pytest.approx(LOG2) and r.exact
    r = static_cover_entropy(mu, Cover((SymbolicSet.full(1), words("0"))), W, full2)
    assert r.value == 0
    # two overlapping half covers at coordinate 0 on the window {0, 1}
    U = Cover((words("0", "11"), words("1")))
    r = static_cover_entropy(mu, U, I(0, 2), full2)
    brute = min(phi(0.5) + phi(0.5), phi(0.75) + phi(0.25))
    assert r.value == pytest.approx(brute) and r.exact
    cells = r.minimizer()
    assert len(cells) == 2


def test_h_mu_partition_examples(full2, golden, box):
    for p in ("1/2", "1/3", "1/4"):
        mu = Bernoulli.binary(p)
        q = float(mu.probs["0"])
        est = h_mu_partition(mu, sym(full2), box, 5, full2)
        assert est.exact
        assert abs(est.certified_upper - (phi(q) + phi(1 - q))) <= 1e-12
    per = h_mu_partition(Periodic.word("011"), sym(full2), box, 10, full2)
    assert all(v <= math.log(3) / n + 1e-12 for n, v in zip(per.ns, per.values))
    mk = Markov.golden_mean(Markov.parry_parameter())
    est = h_mu_partition(mk, sym(golden), box, 10, golden)
    assert est.running_infimum() == sorted(est.running_infimum(), reverse=True)
    assert est.certified_upper == pytest.approx(mk.entropy_rate(), abs=1e-9)
    assert est.values[-1] >= mk.entropy_rate() - 1e-12


def test_h_mu_minus_cover_examples(full2, box, fair):
    part = h_mu_minus_cover(fair, sym(full2), box, 4, full2)
    assert part.values == pytest.approx(h_mu_partition(fair, sym(full2), box, 4, full2).values)
    assert h_mu_minus_cover(fair, Cover.trivial(), box, 3, full2).values == [0.0] * 3
    U = Cover((words("1", "00"), words("0")))
    minus = h_mu_minus_cover(fair, U, box, 6, full2)
    top = h_top(full2, U, box, 6)
    for a, b in zip(minus.values, top.values):
        assert a <= b + 1e-12


def test_h_mu_cover_examples(full2, box, fair):
    ref = h_mu_partition(fair, sym(full2), box, 4, full2)
    assert h_mu_cover(fair, sym(full2), box, 4, full2).values == ref.values
    assert h_mu_cover(fair, Cover.trivial(), box, 3, full2).values == [0.0] * 3
    U = Cover((words("0", "10"), words("1")))
    plus = h_mu_cover(fair, U, box, 8, full2, r=2)
    minus = h_mu_minus_cover(fair, U, box, 8, full2)
    for a, b in zip(plus.values, minus.values):
        assert a >= b - 1e-12
    g = [a - b for a, b in zip(plus.values, minus.values)]
    assert g[7] <= g[3]


def test_refined_partition_refines_cover(full2, box, fair):
    U = Cover((words("0", "11"), words("1")))
    est = h_mu_cover(fair, U, box, 4, full2, r=1)
    rp = est.refined
    alpha = rp.partition()
    lang = full2.language(rp.base.window)
    for cell in alpha:
        m = lang.mask(cell)
        assert any(not (m & ~lang.mask(e)).any() for e in U)


def test_katok_b_examples(full2, fair):
    F = I(0, 6)
    assert katok_b(fair, F, 1e-9, sym(full2), full2).count == 1
    for n in (3, 6, 9):
        assert katok_b(fair, I(0, n), 0.9, sym(full2), full2).count == math.ceil(0.9 * 2**n)
    full_el = Cover((SymbolicSet.full(1), words("0")))
    assert katok_b(fair, F, 0.99, full_el, full2).count == 1


def test_katok_b_overlapping_matches_brute_force(full2, fair):
    import itertools

    U = Cover((words("0", "11"), words("1")))
    F = I(0, 2)
    from localentropy.subshift import pullback_masks, pullback_window

    lang = full2.language(pullback_window(U, F))
    masks = pullback_masks(U, F, lang, prune=False).masks
    mass = fair.masses(lang)
    for a in (0.3, 0.6, 0.9):
        best = min(
            len(c)
            for k in range(1, len(masks) + 1)
            for c in itertools.combinations(range(len(masks)), k)
            if mass[masks[list(c)].any(axis=0)].sum() >= a - 1e-12
        )
        assert katok_b(fair, F, a, U, full2).count == best


def test_katok_entropy_examples(full2, box, fair):
    est = katok_entropy(fair, sym(full2), box, 10, 0.1, full2)
    for n, v in zip(est.ns, est.values):
        assert v == pytest.approx(math.log(math.ceil(0.9 * 2**n)) / n)
    assert all(c["holds"] for c in est.weiss)
    per = katok_entropy(Periodic.word("01"), sym(full2), box, 6, 0.1, full2)
    assert all(v <= LOG2 / n + 1e-12 for n, v in zip(per.ns, per.values))
    assert katok_entropy(fair, Cover.trivial(), box, 3, 0.1, full2).values == [0.0] * 3


def test_separated_set_examples(full2, golden):
    U = Cover((words("0", "11"), words("1")))
    F = I(0, 3)
    alpha = atoms(cover_pullback(U, F), I(0, 4), full2)
    s = separated_set(U, [alpha], FiniteSubset.singleton((0,)), full2)
    assert s.ok
    P = sym(full2)
    s = separated_set(P, [P], I(0, 4), full2)
    assert len(s.points) == 16
    g1 = sym(golden)
    g2 = Partition((words("00"), words("01", "10")))
    s = separated_set(g1, [g1, g2], I(0, 4), golden)
    assert len(s.points) >= math.ceil(s.N / 2) and s.max_per_atom <= 1


def test_vp_check_examples(full2, box, fair):
    rep = vp_check(full2, sym(full2), [fair], box, 6)
    assert rep["gap"] == 0 and rep["one_sided_ok"]
    rep = vp_check(full2, sym(full2), [Periodic.word("01")], box, 6)
    assert rep["gap"] == pytest.approx(LOG2) and rep["one_sided_ok"]


def test_vp_check_markov_sweep(golden, box):
    mus = [Markov.golden_mean(p / 10) for p in range(1, 10)]
    rep = vp_check(golden, sym(golden), mus, box, 12)
    assert rep["one_sided_ok"]
    assert rep["argmax"] == 3  # p = 0.4, nearest the Parry parameter 0.382
    assert rep["gap"] < 1e-3


def test_empirical_vp_measure_examples(full2, golden):
    from localentropy.entropy import shannon as H

    mu, sep = empirical_vp_measure(full2, sym(full2), 8, [sym(full2)])
    assert sep.ok
    m0 = float(mu.cylinder_mass(words("0").cylinders[0]))
    assert abs(m0 - 0.5) < 0.1
    alpha_B = cover_pullback(sym(full2), I(0, 4), full2)
    assert H(mu, alpha_B, I(0, 4), full2) / 4 > LOG2 - 0.1
    triv, _ = empirical_vp_measure(full2, Cover.trivial(), 3, [Partition((SymbolicSet.full(1),))])
    assert len(triv.spec.base_points) == 1
    gm, _ = empirical_vp_measure(golden, sym(golden), 10, [sym(golden)])
    assert gm.cylinder_mass(words("11").cylinders[0]) == 0


def test_folner_independence_exact(golden):
    seq_a = FolnerSequence("box", 1)
    seq_b = FolnerSequence("shifted_interval", 1, (0, 0, 1))
    a = h_top(golden, sym(golden), seq_a, 10)
    b = h_top(golden, sym(golden), seq_b, 10)
    assert a.values == b.values


def test_estimate_json_has_no_timings_by_default(full2, box):
    est = h_top(full2, sym(full2), box, 3)
    assert "seconds" not in est.to_json()
    assert len(est.to_json(timings=True)["seconds"]) == 3
    assert np.isfinite(est.to_json()["certified_upper"])
