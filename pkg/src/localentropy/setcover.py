"""Exact minimum set cover and minimum partial cover by branch and bound.

Small instances are solved by a bitset branch and bound (greedy incumbent,
disjoint-item packing bound).  When that exceeds its share of the node
budget the instance goes to the HiGHS mixed-integer solver shipped with
scipy, whose LP bounds are far stronger.  Exactness is reported only when a
search finished with a proof of optimality; otherwise the incumbent comes
back with exact=False and the best proved lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_BUDGET = 10**7
LOCAL_BUDGET = 2_000


@dataclass
class CoverResult:
    size: int
    chosen: list
    exact: bool
    lower_bound: int
    nodes: int


def _to_bitsets(inc: np.ndarray) -> list[int]:
    out = []
    for row in inc:
        packed = np.packbits(row.astype(bool), bitorder="little")
        out.append(int.from_bytes(packed.tobytes(), "little"))
    return out


def _drop_dominated(sets: list[int]) -> list[int]:
    """Indices of sets not contained in another (first of equal sets kept)."""
    order = sorted(range(len(sets)), key=lambda i: (-sets[i].bit_count(), i))
    kept: list[int] = []
    for i in order:
        s = sets[i]
        if any(s & ~sets[j] == 0 for j in kept):
            continue
        kept.append(i)
    return sorted(kept)


def min_set_cover(inc: np.ndarray, budget: int = DEFAULT_BUDGET) -> CoverResult:
    """Minimum number of rows of ``inc`` (sets × items) covering every item.

    Raises ValueError naming an uncovered item when no cover exists.
    """
    inc = np.asarray(inc, dtype=bool)
    n_sets, n_items = inc.shape
    if n_items == 0:
        return CoverResult(0, [], True, 0, 0)
    uncovered = np.flatnonzero(~inc.any(axis=0))
    if len(uncovered):
        raise ValueError(f"item {int(uncovered[0])} is not covered by any set")
    # items with identical incidence columns are interchangeable
    cols, first = np.unique(inc.T, axis=0, return_index=True)
    inc = inc[:, np.sort(first)]
    n_items = inc.shape[1]
    raw = _to_bitsets(inc)
    keep = _drop_dominated(raw) if n_sets <= 20000 else list(range(n_sets))
    sets = [raw[i] for i in keep]
    full = (1 << n_items) - 1

    holders = [[] for _ in range(n_items)]
    for si, s in enumerate(sets):
        x = s
        while x:
            low = x & -x
            holders[low.bit_length() - 1].append(si)
            x ^= low
    item_order = sorted(range(n_items), key=lambda i: len(holders[i]))
    max_size = max(s.bit_count() for s in sets)

    # greedy incumbent
    rem, greedy = full, []
    while rem:
        best = max(range(len(sets)), key=lambda i: (sets[i] & rem).bit_count())
        greedy.append(best)
        rem &= ~sets[best]
    best_size, best_sol = len(greedy), list(greedy)

    def lower(rem: int) -> int:
        cnt = rem.bit_count()
        lb = -(-cnt // max_size)
        # items whose holder lists are pairwise disjoint need distinct sets
        used = 0
        pack = 0
        for i in item_order:
            if rem >> i & 1:
                hs = 0
                for h in holders[i]:
                    hs |= 1 << h
                if not hs & used:
                    used |= hs
                    pack += 1
        return max(lb, pack)

    root_lb = lower(full)
    budget_left_total = budget
    nodes = 0
    exhausted = False

    def search(rem: int, chosen: list):
        nonlocal best_size, best_sol, nodes, exhausted
        if exhausted:
            return
        nodes += 1
        if nodes > budget:
            exhausted = True
            return
        if not rem:
            if len(chosen) < best_size:
                best_size, best_sol = len(chosen), list(chosen)
            return
        if len(chosen) + lower(rem) >= best_size:
            return
        pivot = next(i for i in item_order if rem >> i & 1)
        cands = sorted(holders[pivot], key=lambda h: -(sets[h] & rem).bit_count())
        for h in cands:
            chosen.append(h)
            search(rem & ~sets[h], chosen)
            chosen.pop()

    local_budget = min(budget, LOCAL_BUDGET)
    budget = local_budget
    if root_lb < best_size:
        search(full, [])
    if not exhausted:
        return CoverResult(best_size, sorted(keep[i] for i in best_sol), True, best_size, nodes)
    sub = inc[keep]
    res = _milp_cover(sub, None, None, budget_left_total - nodes)
    if res is not None and res[0] <= best_size and sub[res[1]].any(axis=0).all():
        size, chosen, exact, lb, extra = res
        return CoverResult(size, sorted(keep[i] for i in chosen), exact, max(lb, root_lb), nodes + extra)
    return CoverResult(best_size, sorted(keep[i] for i in best_sol), False, root_lb, nodes)


def _milp_cover(inc: np.ndarray, weights, target, node_limit: int):
    """Solve (partial) set cover with HiGHS; returns (size, chosen, exact,
    lower bound, nodes) or None when the solver produced no solution."""
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import csr_matrix, hstack, identity

    k, n = inc.shape
    A = csr_matrix(inc.T.astype(float))
    opts = {"mip_rel_gap": 0.0, "node_limit": max(int(node_limit), 1)}
    if weights is None:
        res = milp(np.ones(k), constraints=LinearConstraint(A, lb=1), integrality=np.ones(k), bounds=Bounds(0, 1), options=opts)
        x_len = k
    else:
        # x_s (sets) and y_i (items): y_i <= sum_{s ∋ i} x_s, sum w_i y_i >= target
        link = hstack([A, -identity(n, format="csr")])
        mass = csr_matrix(np.concatenate([np.zeros(k), weights])[None, :])
        cons = [LinearConstraint(link, lb=0), LinearConstraint(mass, lb=target)]
        c = np.concatenate([np.ones(k), np.zeros(n)])
        res = milp(c, constraints=cons, integrality=np.ones(k + n), bounds=Bounds(0, 1), options=opts)
        x_len = k
    if res.x is None:
        return None
    chosen = [int(i) for i in np.flatnonzero(res.x[:x_len] > 0.5)]
    exact = res.status == 0
    dual = getattr(res, "mip_dual_bound", None)
    lb = len(chosen) if exact else (int(math.ceil(dual - 1e-9)) if dual is not None and np.isfinite(dual) else 0)
    return len(chosen), chosen, exact, lb, int(getattr(res, "mip_node_count", 0) or 0)


def min_partial_cover(inc: np.ndarray, weights: np.ndarray, a: float, budget: int = DEFAULT_BUDGET, tol: float = 1e-12) -> CoverResult:
    """Fewest rows of ``inc`` whose union has weight at least ``a - tol``.

    Pairwise disjoint rows are solved directly (largest weights first, which
    is optimal); otherwise branch and bound with a fractional bound built
    from the largest marginal weights.
    """
    inc = np.asarray(inc, dtype=bool)
    w = np.asarray(weights, dtype=float)
    target = a - tol
    if target <= 0:
        return CoverResult(0, [], True, 0, 0)
    row_mass = np.array([w[r].sum() for r in inc])
    if (inc.sum(axis=0) <= 1).all():
        order = np.argsort(-row_mass, kind="stable")
        csum = np.cumsum(row_mass[order])
        hit = np.flatnonzero(csum >= target)
        if not len(hit):
            raise ValueError("the sets do not carry enough mass")
        t = int(hit[0]) + 1
        return CoverResult(t, sorted(int(i) for i in order[:t]), True, t, 1)

    sets = [np.flatnonzero(r) for r in inc]
    n_items = inc.shape[1]

    def mass_of(mask):
        return float(w[mask].sum())

    # greedy incumbent
    covered = np.zeros(n_items, dtype=bool)
    greedy = []
    got = 0.0
    while got < target:
        gains = [(w[s[~covered[s]]].sum(), -i) for i, s in enumerate(sets)]
        g, i = max(gains)
        if g <= 0:
            raise ValueError("the sets do not carry enough mass")
        greedy.append(-i)
        covered[sets[-i]] = True
        got = mass_of(covered)
    best = [len(greedy), list(greedy)]
    nodes = 0
    exhausted = False

    def bound(covered, got):
        gains = np.sort(np.array([w[s[~covered[s]]].sum() for s in sets]))[::-1]
        need = target - got
        csum = np.cumsum(gains)
        hit = np.flatnonzero(csum >= need)
        return int(hit[0]) + 1 if len(hit) else math.inf

    root_lb = bound(np.zeros(n_items, dtype=bool), 0.0)

    def search(start, chosen, covered, got):
        nonlocal nodes, exhausted
        if exhausted:
            return
        nodes += 1
        if nodes > budget:
            exhausted = True
            return
        if got >= target:
            if len(chosen) < best[0]:
                best[0], best[1] = len(chosen), list(chosen)
            return
        if len(chosen) + bound(covered, got) >= best[0]:
            return
        for i in range(start, len(sets)):
            s = sets[i]
            fresh = s[~covered[s]]
            if not len(fresh):
                continue
            covered[fresh] = True
            chosen.append(i)
            search(i + 1, chosen, covered, got + float(w[fresh].sum()))
            chosen.pop()
            covered[fresh] = False

    total_budget = budget
    budget = min(budget, LOCAL_BUDGET)
    if root_lb < best[0]:
        search(0, [], np.zeros(n_items, dtype=bool), 0.0)
    if not exhausted:
        return CoverResult(best[0], sorted(best[1]), True, best[0], nodes)
    res = _milp_cover(inc, w, target, total_budget - nodes)
    if res is not None and res[0] <= best[0] and w[inc[res[1]].any(axis=0)].sum() >= target:
        size, chosen, exact, lb, extra = res
        return CoverResult(size, chosen, exact, max(lb, int(min(root_lb, size))), nodes + extra)
    return CoverResult(best[0], sorted(best[1]), False, int(min(root_lb, best[0])), nodes)
