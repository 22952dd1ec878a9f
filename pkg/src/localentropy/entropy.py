"""Entropy of covers and partitions on subshifts.

All logarithms are natural.  Every dynamical quantity is reported as an
:class:`EntropyEstimate`: the raw sequence of normalised window values, the
running infimum of those values, and a certified upper bound that may also
use other proven upper bounds when they are available (the transfer-matrix
entropy of a 1-d SFT, conditional-entropy increments for invariant measures
on intervals, the closed-form entropy of the measure).  No extrapolation is
ever applied.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .group import FiniteSubset, FolnerSequence, set_product
from .measures import Bernoulli, Measure, phi
from .setcover import DEFAULT_BUDGET, min_partial_cover, min_set_cover
from .subshift import (
    SFT,
    Cover,
    Language,
    Partition,
    WindowedCover,
    WindowTooSmall,
    pullback_labels,
    pullback_masks,
    pullback_window,
    restrict,
    translate,
)

STATIC_BUDGET = 10**6


def sig(x: float) -> float:
    """Round to 12 significant digits for reports."""
    return float(f"{x:.12g}")


@lru_cache(maxsize=128)
def _language(sft: SFT, window: FiniteSubset, margin: int) -> Language:
    return sft.language(window, margin)


def language(sft: SFT, window: FiniteSubset, margin: int = 2) -> Language:
    return _language(sft, window, margin)


@dataclass
class EntropyEstimate:
    """Normalised window values H(F_n)/|F_n| and the bounds derived from them."""

    ns: list = field(default_factory=list)
    sizes: list = field(default_factory=list)
    values: list = field(default_factory=list)
    certified_upper: float = math.inf
    window_infimum: float = math.inf
    extrapolated: float = math.nan
    exact: bool = False
    window_exact: list = field(default_factory=list)
    lower_values: list = field(default_factory=list)
    bounds: dict = field(default_factory=dict)
    approximate_language: bool = False
    timings: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    phi_note: str = "phi(t) = -t log t, natural log"

    def add(self, n: int, size: int, value: float, exact: bool = True, lower: float | None = None, seconds: float = 0.0):
        self.ns.append(n)
        self.sizes.append(size)
        self.values.append(value)
        self.window_exact.append(exact)
        self.lower_values.append(value if lower is None else lower)
        self.timings.append(seconds)

    def finish(self, extra: dict | None = None) -> EntropyEstimate:
        if extra:
            self.bounds.update({k: v for k, v in extra.items() if v is not None})
        self.window_infimum = min(self.values) if self.values else math.inf
        self.certified_upper = min([self.window_infimum, *self.bounds.values()])
        self.extrapolated = self.values[-1] if self.values else math.nan
        return self

    def running_infimum(self) -> list[float]:
        return list(np.minimum.accumulate(self.values)) if self.values else []

    def value_at(self, n: int) -> float:
        return self.values[self.ns.index(n)]

    def to_json(self, timings: bool = False) -> dict:
        out = {
            "values": [
                {"n": n, "size": s, "value": sig(v), "lower": sig(lo), "exact": bool(e)}
                for n, s, v, lo, e in zip(self.ns, self.sizes, self.values, self.lower_values, self.window_exact)
            ],
            "running_infimum": [sig(v) for v in self.running_infimum()],
            "certified_upper": sig(self.certified_upper) if math.isfinite(self.certified_upper) else None,
            "window_infimum": sig(self.window_infimum) if math.isfinite(self.window_infimum) else None,
            "extrapolated": sig(self.extrapolated) if self.values else None,
            "exact": bool(self.exact),
            "approximate_language": bool(self.approximate_language),
            "bounds": {k: sig(v) for k, v in sorted(self.bounds.items())},
            "notes": list(self.notes),
            "phi_note": self.phi_note,
        }
        if timings:
            out["seconds"] = [round(t, 6) for t in self.timings]
        return out


# ---------------------------------------------------------------------------
# Static quantities


@dataclass
class SubcoverResult:
    N: int
    witness: list
    exact: bool
    lower_bound: int
    nodes: int = 0

    @property
    def H(self) -> float:
        return math.log(self.N) if self.N else 0.0


def _min_subcover_masks(w: WindowedCover, budget: int) -> SubcoverResult:
    if not w.covers():
        bad = int(w.uncovered()[0])
        raise ValueError(f"not a cover on this window: {w.lang.pattern(bad)!r} is uncovered")
    if len(w.lang) == 0:
        return SubcoverResult(0, [], True, 0)
    if w.is_partition():
        k = [i for i in range(len(w)) if w.masks[i].any()]
        return SubcoverResult(len(k), k, True, len(k))
    r = min_set_cover(w.masks, budget)
    return SubcoverResult(r.size, r.chosen, r.exact, r.lower_bound, r.nodes)


def min_subcover(U: Cover, window: FiniteSubset, sft: SFT, budget: int = DEFAULT_BUDGET, margin: int = 2) -> SubcoverResult:
    """N(U): exact minimum number of elements covering the window language.

    The witness lists element indices of U."""
    D = U.domain()
    if D and not D.issubset(window):
        raise WindowTooSmall("window must contain every cylinder shape of the cover")
    lang = language(sft, window, margin)
    return _min_subcover_masks(restrict(U, lang), budget)


def pullback_count(U: Cover, F: FiniteSubset, sft: SFT, budget: int = DEFAULT_BUDGET, margin: int = 2) -> SubcoverResult:
    """N(U_F) on the window D F."""
    if not F:
        return SubcoverResult(1, [0], True, 1)
    lang = language(sft, pullback_window(U, F), margin)
    if U.is_partition:
        n = int(pullback_labels(U, F, lang).max()) + 1 if len(lang) else 0
        return SubcoverResult(n, list(range(n)), True, n)
    w = pullback_masks(U, F, lang)
    return _min_subcover_masks(w, budget)


def _as_partition_labels(U: Cover, lang: Language) -> np.ndarray:
    return restrict(U, lang).labels()


def _cell_entropy(mass: np.ndarray, labels: np.ndarray) -> float:
    cells = np.bincount(labels, weights=mass)
    cells = cells[cells > 0]
    return float(-(cells * np.log(cells)).sum())


def shannon(mu: Measure, alpha: Cover, window: FiniteSubset, sft: SFT, margin: int = 2) -> float:
    """H_μ(α) = Σ φ(μ(A))."""
    lang = language(sft, window, margin)
    w = restrict(alpha, lang)
    if not w.is_partition():
        raise ValueError("α is not a partition on this window")
    return _cell_entropy(mu.masses(lang), w.labels())


def conditional(mu: Measure, alpha: Cover, beta: Cover, window: FiniteSubset, sft: SFT, margin: int = 2) -> float:
    """H_μ(α|β) = H_μ(α ∨ β) - H_μ(β)."""
    lang = language(sft, window, margin)
    la = restrict(alpha, lang).labels()
    lb = restrict(beta, lang).labels()
    _, joint = np.unique(la * (int(lb.max()) + 1) + lb, return_inverse=True)
    m = mu.masses(lang)
    return max(0.0, _cell_entropy(m, joint.reshape(-1)) - _cell_entropy(m, lb))


@dataclass
class StaticResult:
    value: float
    assignment: np.ndarray  # cell index per window pattern
    exact: bool
    evaluated: int
    lang: Language | None = None

    def minimizer(self) -> Partition:
        """The minimising partition as unions of window patterns."""
        cells = [self.lang.symbolic(self.assignment == c) for c in np.unique(self.assignment)]
        return Partition(tuple(cells))


def _assignment_value(atom_mass: np.ndarray, choice: np.ndarray, n_cells: int) -> float:
    cells = np.bincount(choice, weights=atom_mass, minlength=n_cells)
    cells = cells[cells > 0]
    return float(-(cells * np.log(cells)).sum())


def _local_search(atom_mass: np.ndarray, inc: np.ndarray, choice: np.ndarray) -> np.ndarray:
    """Steepest single-atom moves, then cell dissolution, until stable."""
    A, E = inc.shape
    holders = [np.flatnonzero(inc[a]) for a in range(A)]
    choice = choice.copy()
    cells = np.bincount(choice, weights=atom_mass, minlength=E)

    def ph(x):
        return -x * np.log(x) if x > 0 else 0.0

    for _ in range(100):
        improved = False
        for a in np.argsort(atom_mass):
            hs = holders[a]
            if len(hs) < 2:
                continue
            m = atom_mass[a]
            c = choice[a]
            base = ph(cells[c] - m) - ph(cells[c])
            gains = [base + ph(cells[h] + m) - ph(cells[h]) if h != c else 0.0 for h in hs]
            j = int(np.argmin(gains))
            if gains[j] < -1e-15:
                h = hs[j]
                cells[c] -= m
                cells[h] += m
                choice[a] = h
                improved = True
        # try to empty whole cells, smallest first
        for c in np.argsort(cells):
            if cells[c] <= 0:
                continue
            members = np.flatnonzero(choice == c)
            trial = cells.copy()
            moves = []
            ok = True
            for a in members:
                alts = [h for h in holders[a] if h != c]
                if not alts:
                    ok = False
                    break
                h = max(alts, key=lambda x: trial[x])
                trial[h] += atom_mass[a]
                trial[c] -= atom_mass[a]
                moves.append((a, h))
            if not ok:
                continue
            old = sum(ph(x) for x in cells)
            new = sum(ph(x) for x in trial)
            if new < old - 1e-15:
                for a, h in moves:
                    choice[a] = h
                cells = trial
                improved = True
        if not improved:
            break
    return choice


def _greedy_assignment(atom_mass: np.ndarray, inc: np.ndarray) -> np.ndarray:
    """Repeatedly give every unassigned atom of the heaviest element to it."""
    A, E = inc.shape
    choice = -np.ones(A, dtype=np.int64)
    free = np.ones(A, dtype=bool)
    weight = inc.T.astype(float) @ atom_mass
    while free.any():
        e = int(np.argmax(weight))
        take = free & inc[:, e]
        choice[take] = e
        free &= ~take
        weight -= inc[take].T.astype(float) @ atom_mass[take]
        weight[e] = -1.0
    return choice


def static_min(atom_mass: np.ndarray, inc: np.ndarray, budget: int = STATIC_BUDGET, seeds: Sequence[np.ndarray] = ()) -> tuple[float, np.ndarray, bool, int]:
    """min over assignments of atoms to containing elements of the entropy
    of the merged partition.

    Exhaustive when the number of assignments is within ``budget``;
    otherwise greedy plus local search from the greedy start and any seeds.
    Returns (value, choice, exact, assignments evaluated).
    """
    A, E = inc.shape
    counts = inc.sum(axis=1)
    if (counts == 0).any():
        raise ValueError("an atom lies in no element")
    free = np.flatnonzero(counts > 1)
    total = math.prod(int(counts[a]) for a in free) if len(free) else 1
    if total <= budget:
        fixed = np.argmax(inc, axis=1)
        base = np.bincount(fixed, weights=np.where(counts == 1, atom_mass, 0.0), minlength=E)
        options = [np.flatnonzero(inc[a]) for a in free]
        best, best_choice = math.inf, None
        batch = 4096
        radices = np.array([len(o) for o in options], dtype=np.int64)
        for start in range(0, total, batch):
            idx = np.arange(start, min(total, start + batch), dtype=np.int64)
            cells = np.tile(base, (len(idx), 1))
            rem = idx.copy()
            digits = np.zeros((len(idx), len(free)), dtype=np.int64)
            for j, r in enumerate(radices):
                digits[:, j] = rem % r
                rem //= r
                cols = options[j][digits[:, j]]
                np.add.at(cells, (np.arange(len(idx)), cols), atom_mass[free[j]])
            with np.errstate(divide="ignore", invalid="ignore"):
                ent = -np.where(cells > 0, cells * np.log(np.where(cells > 0, cells, 1)), 0).sum(axis=1)
            k = int(np.argmin(ent))
            if ent[k] < best:
                best = float(ent[k])
                choice = fixed.copy()
                for j in range(len(free)):
                    choice[free[j]] = options[j][digits[k, j]]
                best_choice = choice
        return best, best_choice, True, total
    starts = [_greedy_assignment(atom_mass, inc), *seeds]
    best, best_choice = math.inf, None
    for s in starts:
        c = _local_search(atom_mass, inc, s)
        v = _assignment_value(atom_mass, c, E)
        if v < best:
            best, best_choice = v, c
    return best, best_choice, False, len(starts)


def _static_on(w: WindowedCover, mass: np.ndarray, budget: int) -> StaticResult:
    if not w.covers():
        raise ValueError("not a cover on this window")
    atom = w.atom_labels()
    n_atoms = int(atom.max()) + 1 if len(atom) else 0
    atom_mass = np.bincount(atom, weights=mass, minlength=n_atoms)
    first = np.zeros(n_atoms, dtype=np.int64)
    first[atom[::-1]] = np.arange(len(atom))[::-1]
    inc = w.masks[:, first].T
    keep = atom_mass > 0
    if not keep.any():
        return StaticResult(0.0, np.zeros(len(atom), dtype=np.int64), True, 1, w.lang)
    value, choice, exact, ev = static_min(atom_mass[keep], inc[keep], budget)
    full_choice = np.argmax(inc, axis=1)
    full_choice[keep] = choice
    return StaticResult(value, full_choice[atom], exact, ev, w.lang)


def static_cover_entropy(mu: Measure, U: Cover, window: FiniteSubset, sft: SFT, budget: int = STATIC_BUDGET, margin: int = 2) -> StaticResult:
    """H_μ(U) = min over partitions β with atoms(U) ⪰ β ⪰ U of H_μ(β)."""
    D = U.domain()
    if D and not D.issubset(window):
        raise WindowTooSmall("window must contain every cylinder shape of the cover")
    lang = language(sft, window, margin)
    return _static_on(restrict(U, lang), mu.masses(lang), budget)


# ---------------------------------------------------------------------------
# Dynamical quantities


def _windows(seq: FolnerSequence, n_max: int):
    for n in range(1, n_max + 1):
        yield n, seq(n)


def _is_interval_sequence(seq: FolnerSequence) -> bool:
    return seq.d == 1 and seq.kind in ("box", "shifted_interval")


def _symbol_partition_of(alpha: Cover, sft: SFT) -> bool:
    """α is {[a at g] : a in the alphabet} for a single point g."""
    if not alpha.is_partition and len(alpha) != len(sft.alphabet):
        return False
    pts, syms = set(), []
    for e in alpha.elements:
        if len(e.cylinders) != 1 or len(e.cylinders[0].shape) != 1:
            return False
        pts |= e.cylinders[0].shape.elements
        syms.append(e.cylinders[0].values[0])
    return len(pts) == 1 and sorted(syms) == sorted(sft.alphabet.symbols)


def h_top(
    sft: SFT,
    U: Cover,
    seq: FolnerSequence,
    n_max: int,
    budget: int = DEFAULT_BUDGET,
    margin: int = 2,
    ceilings: dict | None = None,
) -> EntropyEstimate:
    """log N(U_{F_n}) / |F_n| for n = 1..n_max."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    est = EntropyEstimate(approximate_language=sft.d > 1 and bool(sft.forbidden))
    trivial = any(e.is_full_symbolically() for e in U.elements)
    for n, F in _windows(seq, n_max):
        t = time.perf_counter()
        if trivial:
            est.add(n, len(F), 0.0, True, 0.0, time.perf_counter() - t)
            continue
        r = pullback_count(U, F, sft, budget, margin)
        lower = math.log(max(r.lower_bound, 1)) / len(F)
        est.add(n, len(F), r.H / len(F), r.exact, lower, time.perf_counter() - t)
    extra = dict(ceilings or {})
    if trivial:
        extra["trivial_cover"] = 0.0
    elif sft.d == 1:
        extra["transfer_matrix"] = sft.entropy()
    est.exact = trivial or (_symbol_partition_of(U, sft) and sft.d == 1 and not sft.forbidden)
    est.finish(extra)
    if est.exact and not trivial:
        est.certified_upper = math.log(len(sft.alphabet))
    return est


def _measure_ceiling(mu: Measure) -> float | None:
    return mu.entropy_rate() if mu.invariant else None


def _partition_values(mu: Measure, alpha: Cover, seq: FolnerSequence, n_max: int, sft: SFT, margin: int, labels_fn=None):
    out = []
    for n, F in _windows(seq, n_max):
        t = time.perf_counter()
        lang = language(sft, pullback_window(alpha, F), margin)
        lab = labels_fn(F, lang) if labels_fn else pullback_labels(alpha, F, lang)
        H = _cell_entropy(mu.masses(lang), lab)
        out.append((n, F, H, time.perf_counter() - t))
    return out


def _increment_bound(values: list, mu: Measure, seq: FolnerSequence) -> float | None:
    """min_n H(α_{F_n}) - H(α_{F_{n-1}}), valid for invariant μ on intervals."""
    if not (mu.invariant and _is_interval_sequence(seq)) or len(values) < 2:
        return None
    return min(values[i] - values[i - 1] for i in range(1, len(values)))


def h_mu_partition(
    mu: Measure,
    alpha: Cover,
    seq: FolnerSequence,
    n_max: int,
    sft: SFT,
    margin: int = 2,
    labels_fn=None,
) -> EntropyEstimate:
    """H_μ(α_{F_n}) / |F_n| for n = 1..n_max."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    est = EntropyEstimate(approximate_language=sft.d > 1 and bool(sft.forbidden))
    if isinstance(mu, Bernoulli) and _symbol_partition_of(alpha, sft):
        exact_value = sum(phi(float(v)) for v in mu.probs.values())
        for n, F in _windows(seq, n_max):
            est.add(n, len(F), exact_value, True)
        est.exact = True
        est.finish({"closed_form": exact_value})
        est.certified_upper = exact_value
        est.notes.append("product factorisation: H(α_F) = |F| H(α)")
        return est
    raw = _partition_values(mu, alpha, seq, n_max, sft, margin, labels_fn)
    for n, F, H, t in raw:
        est.add(n, len(F), H / len(F), True, None, t)
    est.finish(
        {
            "conditional_increment": _increment_bound([H for _, _, H, _ in raw], mu, seq),
            "measure_entropy": _measure_ceiling(mu),
        }
    )
    if not mu.invariant:
        est.notes.append("measure is not exactly invariant; values are finite-window evaluations")
    return est


def h_mu_minus_cover(
    mu: Measure,
    U: Cover,
    seq: FolnerSequence,
    n_max: int,
    sft: SFT,
    budget: int = STATIC_BUDGET,
    margin: int = 2,
) -> EntropyEstimate:
    """H_μ(U_{F_n}) / |F_n| with the static cover entropy of each U_{F_n}."""
    if U.is_partition:
        return h_mu_partition(mu, U, seq, n_max, sft, margin)
    est = EntropyEstimate(approximate_language=sft.d > 1 and bool(sft.forbidden))
    all_exact = True
    for n, F in _windows(seq, n_max):
        t = time.perf_counter()
        lang = language(sft, pullback_window(U, F), margin)
        w = pullback_masks(U, F, lang)
        r = _static_on(w, mu.masses(lang), budget)
        all_exact &= r.exact
        est.add(n, len(F), r.value / len(F), r.exact, None, time.perf_counter() - t)
    est.exact = False
    est.finish({"measure_entropy": _measure_ceiling(mu)})
    if not all_exact:
        est.notes.append("some static cover entropies come from local search (upper bounds)")
    return est


@dataclass
class RefinedPartition:
    """A partition α ⪰ U read off the atoms of U on a base window."""

    base: Language
    labels: np.ndarray  # label (element of U) per base-window pattern
    cover: Cover

    def partition(self) -> Partition:
        cells = [self.base.symbolic(self.labels == c) for c in np.unique(self.labels)]
        return Partition(tuple(cells))

    def labels_on(self, F: FiniteSubset, lang: Language) -> np.ndarray:
        lab = np.zeros(len(lang), dtype=np.int64)
        k = len(self.cover)
        for g in F:
            sub = self.base.window.translate(g)
            cols = lang.columns(sub)
            idx = _row_lookup(self.base, lang.table[:, cols])
            lab = lab * k + self.labels[idx]
            _, lab = np.unique(lab, return_inverse=True)
            lab = lab.reshape(-1)
        return lab


def _row_lookup(lang: Language, rows: np.ndarray) -> np.ndarray:
    """Row indices in ``lang`` of the given symbol rows (all must occur)."""
    k = max(len(lang.sft.alphabet), 2)
    weights = k ** np.arange(rows.shape[1] - 1, -1, -1, dtype=np.int64)
    keys = lang.table.astype(np.int64) @ weights
    q = rows.astype(np.int64) @ weights
    order = np.argsort(keys)
    pos = np.searchsorted(keys[order], q)
    pos = np.minimum(pos, len(keys) - 1)
    idx = order[pos]
    if (keys[idx] != q).any():
        raise WindowTooSmall("a sub-window pattern is missing from the base language")
    return idx


def _ball(r: int, d: int) -> FiniteSubset:
    return FiniteSubset.box((-r,) * d, (r + 1,) * d)


def refining_family(U: Cover, r: int, sft: SFT, margin: int = 2):
    """Base language on D B_r, atom labels there and, per atom, the elements
    of U containing it."""
    base_window = pullback_window(U, _ball(r, U.d))
    base = language(sft, base_window, margin)
    gens = np.concatenate([restrict(translate(U, g), base).masks for g in _ball(r, U.d)])
    atom = WindowedCover(base, gens).atom_labels()
    inc0 = restrict(U, base).masks.T  # pattern × element of U
    n_atoms = int(atom.max()) + 1
    first = np.zeros(n_atoms, dtype=np.int64)
    first[atom[::-1]] = np.arange(len(atom))[::-1]
    return base, atom, inc0[first]


def _static_code_candidates(mu, U, r, sft, margin, base, atom, inc) -> list[np.ndarray]:
    """Sliding codes read off a static minimiser of U_{B_r}: each base
    pattern gets the element of U its minimising cell uses at the origin."""
    ball = _ball(r, U.d)
    lang = language(sft, pullback_window(U, ball), margin)
    if lang.window != base.window or len(lang) != len(base):
        return []
    w = pullback_masks(U, ball, lang, prune=False)
    st = _static_on(w, mu.masses(lang), STATIC_BUDGET)
    m0 = restrict(U, lang).masks
    # element of U_{B_r} -> an element of U containing it at the origin
    origin = np.array([int(np.flatnonzero([not (cell & ~m0[j]).any() for j in range(len(U))])[0]) for cell in w.masks])
    lab = origin[st.assignment]
    idx = _row_lookup(lang, base.table)
    choice = np.zeros(len(inc), dtype=np.int64)
    choice[atom] = lab[idx]
    # an atom split across cells keeps a label valid for all its patterns
    ok = inc[np.arange(len(inc)), choice]
    if not ok.all():
        return []
    return [choice]


def h_mu_cover(
    mu: Measure,
    U: Cover,
    seq: FolnerSequence,
    n_max: int,
    sft: SFT,
    r: int = 1,
    budget: int = 256,
    margin: int = 2,
    sweeps: int = 3,
) -> EntropyEstimate:
    """Best h_μ(G, α) over partitions α ⪰ U that assign each atom of U_{B_r}
    to an element of U containing it (B_r = {-r..r}^d).

    Assignments are enumerated when there are at most ``budget`` of them and
    otherwise improved by coordinate descent from the better of the
    heaviest-element start and a sliding code of a static minimiser of
    U_{B_r}; the objective is H_μ(α_{F_{n_max}}).  Every such α gives a valid
    upper bound for h_μ(G, U).
    """
    if r < 0:
        raise ValueError("refinement depth must be >= 0")
    if U.is_partition:
        return h_mu_partition(mu, U, seq, n_max, sft, margin)
    if any(e.is_full_symbolically() for e in U.elements):
        est = EntropyEstimate()
        for n, F in _windows(seq, n_max):
            est.add(n, len(F), 0.0)
        est.exact = True
        return est.finish({"trivial_cover": 0.0})
    base, atom, inc = refining_family(U, r, sft, margin)
    F_top = seq(n_max)
    big = language(sft, set_product(base.window, F_top), margin)
    mass_big = mu.masses(big)
    base_mass = np.bincount(atom, weights=mu.masses(base) if mu.invariant else np.ones(len(atom)), minlength=len(inc))

    def evaluate(choice: np.ndarray) -> float:
        rp = RefinedPartition(base, choice[atom], U)
        return _cell_entropy(mass_big, rp.labels_on(F_top, big))

    options = [np.flatnonzero(row) for row in inc]
    free = [a for a, o in enumerate(options) if len(o) > 1]
    total = math.prod(len(options[a]) for a in free) if free else 1
    start = _greedy_assignment(base_mass, inc)
    best_choice, best = start, evaluate(start)
    for cand in _static_code_candidates(mu, U, r, sft, margin, base, atom, inc):
        v = evaluate(cand)
        if v < best - 1e-15:
            best, best_choice = v, cand
    searched = "exhaustive"
    if total <= budget:
        for combo in itertools.product(*(options[a] for a in free)):
            c = start.copy()
            c[free] = combo
            v = evaluate(c)
            if v < best - 1e-15:
                best, best_choice = v, c
    else:
        searched = "coordinate descent"
        for _ in range(sweeps):
            moved = False
            for a in free:
                for e in options[a]:
                    if e == best_choice[a]:
                        continue
                    c = best_choice.copy()
                    c[a] = e
                    v = evaluate(c)
                    if v < best - 1e-15:
                        best, best_choice, moved = v, c, True
            if not moved:
                break
    rp = RefinedPartition(base, best_choice[atom], U)
    est = h_mu_partition(mu, rp.partition(), seq, n_max, sft, margin, labels_fn=rp.labels_on)
    est.exact = False
    est.notes.append(f"refinement depth {r}: {searched} over {total} assignment(s) of {len(inc)} atoms")
    est.refined = rp  # type: ignore[attr-defined]
    return est


# ---------------------------------------------------------------------------
# Katok statistic


@dataclass
class KatokCount:
    F: FiniteSubset
    a: float
    count: int
    subfamily: list
    exact: bool
    mass: float

    def to_json(self) -> dict:
        return {"size": len(self.F), "a": sig(self.a), "count": self.count, "exact": self.exact, "mass": sig(self.mass)}


def katok_b(mu: Measure, F: FiniteSubset, a: float, U: Cover, sft: SFT, budget: int = DEFAULT_BUDGET, margin: int = 2) -> KatokCount:
    """b(F, a, U): fewest elements of U_F carrying μ-mass at least a."""
    if not 0 < a < 1:
        raise ValueError("a must lie in (0, 1)")
    lang = language(sft, pullback_window(U, F), margin)
    mass = mu.masses(lang)
    if U.is_partition:
        # disjoint atoms: the heaviest ones first is optimal
        lab = pullback_labels(U, F, lang)
        atom_mass = np.bincount(lab, weights=mass)
        order = np.argsort(-atom_mass, kind="stable")
        hit = np.flatnonzero(np.cumsum(atom_mass[order]) >= a - 1e-12)
        t = int(hit[0]) + 1
        return KatokCount(F, a, t, sorted(int(i) for i in order[:t]), True, float(atom_mass[order[:t]].sum()))
    masks = pullback_masks(U, F, lang).masks
    r = min_partial_cover(masks, mass, a, budget)
    got = float(mass[masks[r.chosen].any(axis=0)].sum()) if r.chosen else 0.0
    return KatokCount(F, a, r.size, r.chosen, r.exact, got)


def _static_value(mu: Measure, U: Cover, F: FiniteSubset, sft: SFT, margin: int, budget: int = STATIC_BUDGET) -> tuple[float, bool]:
    lang = language(sft, pullback_window(U, F), margin)
    if U.is_partition:
        return _cell_entropy(mu.masses(lang), pullback_labels(U, F, lang)), True
    r = _static_on(pullback_masks(U, F, lang), mu.masses(lang), budget)
    return r.value, r.exact


def katok_entropy(
    mu: Measure,
    U: Cover,
    seq: FolnerSequence,
    n_max: int,
    eps: float,
    sft: SFT,
    budget: int = DEFAULT_BUDGET,
    margin: int = 2,
    require_ergodic: bool = True,
) -> EntropyEstimate:
    """(1/|F_n|) log b(F_n, 1 - eps, U), with the inequality
    H_μ(U_F) <= log b(F, a, U) + (1 - a)|F| log N(U) + log 2 checked per window."""
    if require_ergodic and not mu.ergodic:
        raise ValueError("the Katok statistic needs an ergodic measure")
    a = 1 - eps
    est = EntropyEstimate(approximate_language=sft.d > 1 and bool(sft.forbidden))
    D = U.domain()
    N_U = min_subcover(U, D if D else FiniteSubset.singleton((0,) * U.d), sft, budget, margin).N
    checks = []
    for n, F in _windows(seq, n_max):
        t = time.perf_counter()
        kb = katok_b(mu, F, a, U, sft, budget, margin)
        H, h_exact = _static_value(mu, U, F, sft, margin)
        rhs = math.log(kb.count) + (1 - a) * len(F) * math.log(N_U) + math.log(2)
        checks.append({"n": n, "H": sig(H), "rhs": sig(rhs), "holds": H <= rhs + 1e-12, "exact": h_exact and kb.exact})
        est.add(n, len(F), math.log(kb.count) / len(F), kb.exact, None, time.perf_counter() - t)
    est.finish()
    est.weiss = checks  # type: ignore[attr-defined]
    return est


# ---------------------------------------------------------------------------
# Separated sets and the variational principle


@dataclass
class SeparatedSet:
    points: list
    lower_bound: float
    N: int
    K: int
    max_per_atom: int
    rows: np.ndarray
    lang: Language

    @property
    def ok(self) -> bool:
        return len(self.points) >= self.lower_bound and self.max_per_atom <= 1


def separated_set(U: Cover, alphas: Sequence[Cover], F: FiniteSubset, sft: SFT, budget: int = DEFAULT_BUDGET, margin: int = 2) -> SeparatedSet:
    """Pick the least remaining pattern, discard every pattern sharing an atom
    of some (α_l)_F with it, repeat.  Asserts #points >= N(U_F)/K."""
    if not alphas:
        raise ValueError("need at least one refining partition")
    window = pullback_window(U, F)
    for al in alphas:
        window = window | pullback_window(al, F)
    lang = language(sft, window, margin)
    labs = [pullback_labels(al, F, lang) for al in alphas]
    wU = pullback_masks(U, F, lang)
    N = _min_subcover_masks(wU, budget).N
    residual = np.ones(len(lang), dtype=bool)
    rows = []
    while residual.any():
        i = int(np.argmax(residual))
        rows.append(i)
        for lab in labs:
            residual &= lab != lab[i]
    rows = np.array(rows, dtype=np.int64)
    per_atom = max(int(np.bincount(lab[rows]).max()) for lab in labs)
    K = len(alphas)
    out = SeparatedSet([lang.pattern(i) for i in rows], N / K, N, K, per_atom, rows, lang)
    if not out.ok:
        raise AssertionError(f"separated set of size {len(rows)} violates the bound N/K = {N / K}")
    return out


def vp_check(sft: SFT, U: Cover, measures: Sequence[Measure], seq: FolnerSequence, n_max: int, r: int = 1, margin: int = 2) -> dict:
    """Compare h_top(G, U) with h_μ(G, U) for each measure."""
    top = h_top(sft, U, seq, n_max, margin=margin)
    per = []
    for mu in measures:
        e = h_mu_cover(mu, U, seq, n_max, sft, r, margin=margin)
        per.append(e)
    best = max(range(len(per)), key=lambda i: per[i].certified_upper) if per else None
    hmax = per[best].certified_upper if per else 0.0
    return {
        "h_top": top,
        "measures": per,
        "argmax": best,
        "max": hmax,
        "gap": top.certified_upper - hmax,
        "one_sided_ok": all(e.certified_upper <= top.certified_upper + 1e-9 for e in per),
    }


def empirical_vp_measure(sft: SFT, U: Cover, n: int, partitions: Sequence[Cover], seq: FolnerSequence | None = None, pad: int | None = None, margin: int = 2):
    """The empirical measure (1/|F_n|) Σ_g g ν_n with ν_n uniform on a
    separated set B_n built from ``partitions`` on F_n.

    Points are extended lex-least to a master window wide enough for every
    shift by F_n of the original window plus ``pad`` extra cells (d = 1)."""
    from .measures import Empirical, EmpiricalSpec

    if sft.d != 1:
        raise ValueError("empirical variational measures are built for d = 1")
    seq = seq or FolnerSequence("box", 1)
    F = seq(n)
    sep = separated_set(U, partitions, F, sft, margin=margin)
    lo, hi = sep.lang.window.bounds()
    fmax = F.bounds()[1][0]
    pad = n if pad is None else pad
    master = FiniteSubset.interval(lo[0], hi[0] + fmax + pad + 1)
    pts = [sft.extend_lex_least(p, master) for p in sep.points]
    return Empirical(EmpiricalSpec(pts, F)), sep
