from __future__ import annotations

import itertools

import numpy as np
import pytest

from localentropy.setcover import min_partial_cover, min_set_cover


def brute_cover(inc: np.ndarray) -> int:
    k = len(inc)
    for size in range(0, k + 1):
        for combo in itertools.combinations(range(k), size):
            if inc[list(combo)].any(axis=0).all() if combo else inc.shape[1] == 0:
                return size
    raise AssertionError("no cover")


def brute_partial(inc: np.ndarray, w: np.ndarray, a: float) -> int:
    k = len(inc)
    for size in range(0, k + 1):
        for combo in itertools.combinations(range(k), size):
            covered = inc[list(combo)].any(axis=0) if combo else np.zeros(inc.shape[1], bool)
            if w[covered].sum() >= a - 1e-12:
                return size
    raise AssertionError("not enough mass")


def random_instance(rng, k, n, p):
    inc = rng.random((k, n)) < p
    for j in range(n):
        if not inc[:, j].any():
            inc[rng.integers(k), j] = True
    return inc


def test_min_set_cover_matches_brute_force():
    rng = np.random.default_rng(7)
    for _ in range(150):
        inc = random_instance(rng, int(rng.integers(1, 9)), int(rng.integers(1, 12)), 0.35)
        res = min_set_cover(inc)
        assert res.exact
        assert res.size == brute_cover(inc)
        assert inc[res.chosen].any(axis=0).all()


def test_min_partial_cover_matches_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(150):
        inc = random_instance(rng, int(rng.integers(1, 8)), int(rng.integers(1, 10)), 0.4)
        w = rng.random(inc.shape[1])
        w /= w.sum()
        a = float(rng.uniform(0.1, 1.0))
        res = min_partial_cover(inc, w, a)
        assert res.exact
        assert res.size == brute_partial(inc, w, a)
        assert w[inc[res.chosen].any(axis=0)].sum() >= a - 1e-12


def test_uncovered_item_is_reported():
    with pytest.raises(ValueError, match="item 1"):
        min_set_cover(np.array([[True, False]]))


def test_disjoint_partial_cover_takes_heaviest():
    inc = np.eye(4, dtype=bool)
    w = np.array([0.1, 0.4, 0.3, 0.2])
    res = min_partial_cover(inc, w, 0.65)
    assert res.size == 2 and res.chosen == [1, 2]


def test_large_instance_goes_through_the_solver():
    # pairs {i, i+1 mod n} on a cycle of length 31 need 16 sets
    n = 31
    inc = np.zeros((n, n), dtype=bool)
    for i in range(n):
        inc[i, i] = inc[i, (i + 1) % n] = True
    res = min_set_cover(inc, budget=10**6)
    assert res.size == 16 and res.exact


def test_budget_exhaustion_is_reported():
    rng = np.random.default_rng(3)
    inc = random_instance(rng, 60, 80, 0.08)
    res = min_set_cover(inc, budget=1)
    assert inc[res.chosen].any(axis=0).all()
    assert res.lower_bound <= res.size
