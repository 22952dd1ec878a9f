"""Entropy pairs and tuples for subshifts: admissible covers built from point
tuples, the measures λ_n(μ) in the two solvable Pinsker regimes, the
measure-theoretic equivalence check, the product formula and uniform
positive entropy evidence.

Points are represented by cylinders of patterns on a common window.  A
NEGATIVE verdict is a sound refutation (the canonical cover is admissible and
its entropy is certified below tol); a POSITIVE verdict is evidence only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .entropy import h_mu_minus_cover, h_top, sig
from .group import FiniteSubset, FolnerSequence, set_product
from .measures import Bernoulli, Measure, Periodic, UnsupportedMeasure
from .setcover import min_set_cover
from .subshift import (
    SFT,
    Cover,
    EmptyLanguage,
    Pattern,
    SymbolicSet,
    _nonempty,
    _simplify,
    pair_pattern,
    pullback_masks,
    pullback_window,
    split_pattern,
    translate,
)

POSITIVE = "POSITIVE"
NEGATIVE = "NEGATIVE"
UNDECIDED = "UNDECIDED"

DEFAULT_TOL = 1e-3
DEFAULT_RMAX = 3
DEFAULT_NMAX = 8


class DiagonalTuple(ValueError):
    """All points of the candidate coincide."""


def ball(r: int, d: int = 1) -> FiniteSubset:
    return FiniteSubset.box((-r,) * d, (r + 1,) * d)


@dataclass(frozen=True)
class TupleCandidate:
    """Points x_1..x_n given by patterns on a common window; ``r`` labels the
    resolution the window stands for."""

    points: tuple
    r: int = 0

    def __post_init__(self):
        pts = tuple(self.points)
        if len(pts) < 2:
            raise ValueError("a tuple needs at least two points")
        shapes = {p.shape for p in pts}
        if len(shapes) != 1:
            raise ValueError("points must share a window")
        if len(set(pts)) == 1:
            raise DiagonalTuple("all points coincide: the tuple lies on the diagonal")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def window(self) -> FiniteSubset:
        return self.points[0].shape

    @classmethod
    def of_words(cls, words: Sequence[str], start: int = 0, r: int | None = None) -> TupleCandidate:
        pts = tuple(Pattern.word(w, start) for w in words)
        return cls(pts, r if r is not None else max(len(w) for w in words) - 1)

    def to_json(self) -> dict:
        return {"r": self.r, "points": [p.to_json() for p in self.points]}

    @classmethod
    def from_json(cls, data) -> TupleCandidate:
        pts = [Pattern.from_json(p) for p in data["points"]]
        return cls(tuple(pts), int(data.get("r", 0)))


@dataclass(frozen=True)
class AdmissibleCoverSpec:
    cover: Cover
    source: TupleCandidate
    members: tuple  # for each element, the indices of the points it excludes


def admissible_cover(c: TupleCandidate, sft: SFT, margin: int = 2) -> AdmissibleCoverSpec:
    """U_i = the window complement of the cylinder of point i, as a union of
    the other window patterns of the language.  Repeated points share an
    element; points outside the language are rejected."""
    lang = sft.language(c.window, margin)
    rows = []
    for p in c.points:
        i = lang.index(p)
        if i < 0:
            raise EmptyLanguage(f"point {p!r} is not in the language")
        rows.append(i)
    distinct = list(dict.fromkeys(rows))
    elements, members = [], []
    for i in distinct:
        keep = np.ones(len(lang), dtype=bool)
        keep[i] = False
        elements.append(lang.symbolic(keep))
        members.append(tuple(j for j, r in enumerate(rows) if r == i))
    return AdmissibleCoverSpec(Cover(tuple(elements)), c, tuple(members))


def refine_candidate(c: TupleCandidate, r: int, sft: SFT) -> TupleCandidate:
    """The candidate at a finer resolution: the window grows by r - c.r in
    every direction and each point gets its lexicographically least
    admissible extension."""
    if r < c.r:
        raise ValueError("cannot coarsen a candidate")
    if r == c.r:
        return c
    window = set_product(c.window, ball(r - c.r, sft.d))
    pts = []
    for p in c.points:
        if sft.d == 1:
            pts.append(sft.extend_lex_least(p, window))
        else:
            lang = sft.language(window, restrict=p)
            if not len(lang):
                raise EmptyLanguage(f"point {p!r} has no extension")
            pts.append(lang.pattern(0))
    return TupleCandidate(tuple(pts), r)


@dataclass
class ResolutionVerdict:
    r: int
    verdict: str
    certified_upper: float
    last_value: float
    cover_size: int

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "verdict": self.verdict,
            "certified_upper": sig(self.certified_upper),
            "last_value": sig(self.last_value),
            "cover_size": self.cover_size,
        }


@dataclass
class TupleVerdict:
    verdict: str
    resolutions: list
    candidate: TupleCandidate
    certified: bool  # True only for NEGATIVE (a proof); POSITIVE is evidence

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "certified": self.certified,
            "candidate": self.candidate.to_json(),
            "resolutions": [v.to_json() for v in self.resolutions],
        }


def _classify(certified_upper: float, last: float, tol: float) -> str:
    if certified_upper < tol:
        return NEGATIVE
    if last > tol:
        return POSITIVE
    return UNDECIDED


def combine(verdicts: Sequence[str]) -> str:
    if NEGATIVE in verdicts:
        return NEGATIVE
    if verdicts and all(v == POSITIVE for v in verdicts):
        return POSITIVE
    return UNDECIDED


def is_entropy_tuple(
    sft: SFT,
    c: TupleCandidate,
    r_max: int | None = None,
    n_max: int = DEFAULT_NMAX,
    tol: float = DEFAULT_TOL,
    seq: FolnerSequence | None = None,
    ceilings=None,
) -> TupleVerdict:
    """Semi-decision for c being an entropy tuple through its canonical
    admissible covers at resolutions c.r .. r_max.

    ``ceilings(candidate)`` may return extra proven upper bounds for h_top of
    the canonical cover at a resolution (used by the product check).
    """
    r_max = c.r if r_max is None else r_max
    if r_max < c.r:
        raise ValueError("r_max must be >= the candidate resolution")
    seq = seq or FolnerSequence("box", sft.d)
    out = []
    for r in range(c.r, r_max + 1):
        cr = refine_candidate(c, r, sft)
        spec = admissible_cover(cr, sft)
        extra = ceilings(cr) if ceilings else None
        est = h_top(sft, spec.cover, seq, n_max, ceilings=extra)
        v = _classify(est.certified_upper, est.values[-1], tol)
        out.append(ResolutionVerdict(r, v, est.certified_upper, est.values[-1], len(spec.cover)))
        if v == NEGATIVE:
            break
    verdict = combine([v.verdict for v in out])
    return TupleVerdict(verdict, out, c, verdict == NEGATIVE)


@dataclass
class UpeReport:
    verdict: str  # UPE_EVIDENCE | REFUTED | INCONCLUSIVE
    r: int
    pairs: list
    witness: tuple | None = None

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "r": self.r,
            "witness": [p.to_json() for p in self.witness] if self.witness else None,
            "pairs": [
                {"points": ["".join(p.values) for p in tv.candidate.points], "verdict": tv.verdict}
                for tv in self.pairs
            ],
        }


def upe_check(sft: SFT, r: int, n_max: int = DEFAULT_NMAX, tol: float = DEFAULT_TOL) -> UpeReport:
    """Verdicts for every pair of distinct r-cylinders (window {-r..r}^d)."""
    lang = sft.language(ball(r, sft.d))
    pats = lang.patterns()
    results = []
    witness = None
    for a, b in itertools.combinations(pats, 2):
        tv = is_entropy_tuple(sft, TupleCandidate((a, b), r), r, n_max, tol)
        results.append(tv)
        if tv.verdict == NEGATIVE and witness is None:
            witness = (a, b)
    if witness is not None:
        verdict = "REFUTED"
    elif all(tv.verdict == POSITIVE for tv in results):
        verdict = "UPE_EVIDENCE"
    else:
        verdict = "INCONCLUSIVE"
    return UpeReport(verdict, r, results, witness)


# ---------------------------------------------------------------------------
# λ_n(μ)


def _symbols(mu: Measure) -> list[str]:
    if isinstance(mu, Bernoulli):
        return sorted(mu.probs)
    if isinstance(mu, Periodic):
        return sorted(set(mu.tile.values()))
    raise UnsupportedMeasure(f"no alphabet known for {mu.variant} measures")


def exact_set_mass(mu: Measure, U: SymbolicSet, sft: SFT | None = None):
    """μ(U) summed exactly over the patterns on U's shape."""
    if U.is_empty_symbolically():
        return Fraction(0)
    if U.is_full_symbolically():
        return Fraction(1)
    sft = sft or SFT.full_shift(_symbols(mu), U.d)
    lang = sft.language(U.shape())
    total = Fraction(0)
    for i in np.flatnonzero(lang.mask(U)):
        total += mu.cylinder_mass(lang.pattern(int(i)))
    return total


@dataclass(frozen=True)
class LambdaN:
    variant: str  # "product" | "diagonal"
    base: Measure
    n: int

    def mass(self, sets: Sequence[SymbolicSet], sft: SFT | None = None):
        """λ_n(μ)(A_1 × ... × A_n)."""
        if len(sets) != self.n:
            raise ValueError(f"expected {self.n} sets")
        if self.variant == "product":
            out = Fraction(1)
            for A in sets:
                out *= exact_set_mass(self.base, A, sft)
            return out
        inter = sets[0]
        for A in sets[1:]:
            inter = _simplify(inter.intersect(A))
        return exact_set_mass(self.base, inter, sft)


def lambda_n(mu: Measure, n: int) -> LambdaN:
    """λ_n(μ) when the Pinsker algebra is trivial (product) or full (diagonal)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if mu.pinsker == "trivial" and isinstance(mu, Bernoulli):
        return LambdaN("product", mu, n)
    if mu.pinsker == "full" and isinstance(mu, Periodic):
        return LambdaN("diagonal", mu, n)
    raise UnsupportedMeasure(f"λ_n is only available for Bernoulli and periodic measures, not {mu.variant}")


def _window_complement(U: SymbolicSet, window: FiniteSubset, sft: SFT) -> SymbolicSet:
    lang = sft.language(window)
    return lang.symbolic(~lang.mask(U))


@dataclass
class MeasureTupleReport:
    lambda_mass: Fraction
    entropy_value: float
    entropy_certified_upper: float
    lambda_positive: bool
    entropy_positive: bool | None  # None when undecided
    agree: bool | None
    degenerate: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "lambda_mass": str(self.lambda_mass),
            "lambda_mass_float": sig(float(self.lambda_mass)),
            "entropy_value": sig(self.entropy_value),
            "entropy_certified_upper": sig(self.entropy_certified_upper),
            "lambda_positive": self.lambda_positive,
            "entropy_positive": self.entropy_positive,
            "agree": self.agree,
            "degenerate_elements": self.degenerate,
        }


def measure_tuple_check(
    mu: Measure,
    U: Cover,
    sft: SFT,
    seq: FolnerSequence | None = None,
    n_max: int = DEFAULT_NMAX,
    tol: float = DEFAULT_TOL,
) -> MeasureTupleReport:
    """Both sides of the equivalence h_μ(G, U) > 0 ⇔ λ_n(μ)(∏ U_i^c) > 0."""
    lam = lambda_n(mu, len(U))
    window = U.domain()
    comps = [_window_complement(e, window, sft) for e in U.elements]
    degenerate = [i for i, c in enumerate(comps) if c.is_empty_symbolically()]
    mass = lam.mass(comps, sft)
    seq = seq or FolnerSequence("box", sft.d)
    est = h_mu_minus_cover(mu, U, seq, n_max, sft)
    if est.certified_upper < tol:
        h_pos: bool | None = False
    elif est.values[-1] > tol:
        h_pos = True
    else:
        h_pos = None
    lam_pos = mass > 0
    agree = None if (degenerate or h_pos is None) else (lam_pos == h_pos)
    return MeasureTupleReport(mass, est.values[-1], est.certified_upper, lam_pos, h_pos, agree, degenerate)


# ---------------------------------------------------------------------------
# Products


def _project(c: TupleCandidate, side: int) -> list[Pattern]:
    return [split_pattern(p)[side] for p in c.points]


def _factor_status(sft: SFT, pts: list[Pattern], r_max: int, n_max: int, tol: float, r: int) -> str:
    """POSITIVE/NEGATIVE/UNDECIDED for the projected tuple, or SUPPORT /
    OFF_SUPPORT when it lies on the diagonal."""
    if len(set(pts)) == 1:
        return "SUPPORT" if sft.in_support(pts[0]) else "OFF_SUPPORT"
    return is_entropy_tuple(sft, TupleCandidate(tuple(pts), r), r_max, n_max, tol).verdict


def predict_product(s1: str, s2: str) -> str:
    """E(X1 × X2) = E(X1) × (E(X2) ∪ Δ^S(X2)) ∪ Δ^S(X1) × E(X2), in three
    values; factor tuples on the diagonal are SUPPORT or OFF_SUPPORT."""

    def member(s: str, diag_ok: bool) -> str:
        if s == POSITIVE or (diag_ok and s == "SUPPORT"):
            return POSITIVE
        if s == UNDECIDED:
            return UNDECIDED
        return NEGATIVE

    def both(a: str, b: str) -> str:
        if NEGATIVE in (a, b):
            return NEGATIVE
        return POSITIVE if a == b == POSITIVE else UNDECIDED

    def either(a: str, b: str) -> str:
        if POSITIVE in (a, b):
            return POSITIVE
        return NEGATIVE if a == b == NEGATIVE else UNDECIDED

    left = both(member(s1, False), member(s2, True))
    right = both(member(s1, True), member(s2, False))
    return either(left, right)


def _factor_ceilings(sft: SFT, n_max: int):
    """Proven upper bounds for the canonical product cover: when the points'
    projections to one factor are distinct, the pulled back factor cover
    refines the product cover elementwise, so its entropy bounds ours."""
    a, b = sft.factors

    def ceil(c: TupleCandidate) -> dict:
        out = {}
        for side, f in enumerate((a, b)):
            pts = _project(c, side)
            if len(set(pts)) == len(pts):
                spec = admissible_cover(TupleCandidate(tuple(pts), c.r), f)
                est = h_top(f, spec.cover, FolnerSequence("box", f.d), n_max)
                out[f"factor_{side + 1}"] = est.certified_upper
        return out

    return ceil


@dataclass
class ProductReport:
    rows: list
    agreements: int
    disagreements: int
    decided: int

    def to_json(self) -> dict:
        return {"agreements": self.agreements, "disagreements": self.disagreements, "decided": self.decided, "rows": self.rows}


def product_candidates(sft: SFT, r: int = 0, length: int = 1, sample: int | None = None, seed: int = 0) -> list[TupleCandidate]:
    """Pairs of distinct product words of the given length starting at 0,
    optionally a seeded sample of them."""
    lang = sft.language(FiniteSubset.interval(0, length))
    pairs = list(itertools.combinations(lang.patterns(), 2))
    if sample is not None and sample < len(pairs):
        rng = np.random.default_rng(seed)
        pick = sorted(rng.choice(len(pairs), size=sample, replace=False))
        pairs = [pairs[i] for i in pick]
    return [TupleCandidate(p, r) for p in pairs]


def product_tuple_check(
    sft1: SFT,
    sft2: SFT,
    candidates: Sequence[TupleCandidate] | None = None,
    r_max: int | None = None,
    n_max: int = 6,
    tol: float = DEFAULT_TOL,
    sft: SFT | None = None,
) -> ProductReport:
    """Compare product verdicts with the formula's prediction from factor
    verdicts; UNDECIDED on either side is excluded from the tally."""
    from .subshift import product_sft

    prod = sft or product_sft(sft1, sft2)
    if candidates is None:
        candidates = product_candidates(prod)
    ceil = _factor_ceilings(prod, n_max)
    rows, agree, disagree = [], 0, 0
    for c in candidates:
        rm = c.r if r_max is None else r_max
        s1 = _factor_status(sft1, _project(c, 0), rm, n_max, tol, c.r)
        s2 = _factor_status(sft2, _project(c, 1), rm, n_max, tol, c.r)
        predicted = predict_product(s1, s2)
        got = is_entropy_tuple(prod, c, rm, n_max, tol, ceilings=ceil).verdict
        decided = UNDECIDED not in (predicted, got)
        if decided:
            if predicted == got:
                agree += 1
            else:
                disagree += 1
        rows.append(
            {
                "points": ["".join(p.values) for p in c.points],
                "factor_1": s1,
                "factor_2": s2,
                "predicted": predicted,
                "verdict": got,
                "decided": decided,
            }
        )
    return ProductReport(rows, agree, disagree, agree + disagree)


def pair_product(c1: TupleCandidate, c2: TupleCandidate) -> TupleCandidate:
    """The product tuple ((x_i, y_i))_i of two tuples on the same window."""
    if c1.n != c2.n:
        raise ValueError("tuples must have the same arity")
    return TupleCandidate(tuple(pair_pattern(p, q) for p, q in zip(c1.points, c2.points)), max(c1.r, c2.r))


# ---------------------------------------------------------------------------
# Weak-mixing mechanism


def pair_cover_separation(
    U1: SymbolicSet,
    U2: SymbolicSet,
    g_sequence: Sequence,
    sft: SFT,
    m: int | None = None,
) -> tuple[int, int] | None:
    """Indices j1 < j2 (1-based) with U1 ∩ g_{j1} g_{j2}^{-1} U2 nonempty,
    searched only when N(∨ g_i^{-1}{U1^c, U2^c}) exceeds m + 1."""
    gs = [tuple(g) if isinstance(g, (tuple, list)) else (int(g),) for g in g_sequence]
    m = len(gs) if m is None else m
    gs = gs[:m]
    if len(set(gs)) != len(gs):
        raise ValueError("g_sequence must consist of distinct elements")
    window = U1.shape() | U2.shape()
    if not window:
        window = FiniteSubset.of([(0,) * sft.d], sft.d)
    C1 = _window_complement(U1, window, sft)
    C2 = _window_complement(U2, window, sft)
    lang = sft.language(window)
    if not (lang.mask(C1) | lang.mask(C2)).all():
        raise ValueError("{U1^c, U2^c} is not a cover")
    W = Cover((C1, C2))
    F = FiniteSubset.of(gs, sft.d)
    big = sft.language(pullback_window(W, F))
    masks = pullback_masks(W, F, big)
    N = min_set_cover(masks.masks).size
    if N <= m + 1:
        return None
    for j1, j2 in itertools.combinations(range(len(gs)), 2):
        h = tuple(a - b for a, b in zip(gs[j1], gs[j2]))
        # h V = {x : h^{-1} x in V} is V translated by -h
        V = translate(U2, tuple(-c for c in h))
        if _nonempty(_simplify(U1.intersect(V)), sft):
            return (j1 + 1, j2 + 1)
    return None
