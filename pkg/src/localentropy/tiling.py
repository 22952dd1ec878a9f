"""Ornstein–Weiss covering machinery: ε-disjoint families, δ-even covers and
ε-quasi-tilings of finite subsets of Z^d.

Families of translates are handled on dense boolean grids; the greedy
admission loops are sequential and deterministic (lexicographic order of the
base points).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .group import (
    FiniteSubset,
    identity,
    inverse_set,
    invariance_ratio,
    set_product,
)


class PreconditionError(ValueError):
    def __init__(self, message: str, ratio: float | None = None):
        super().__init__(message)
        self.ratio = ratio


@dataclass(frozen=True)
class DisjointFamilyWitness:
    members: tuple
    cores: tuple
    epsilon: float

    def ratios(self) -> list[float]:
        return [len(b) / len(a) for a, b in zip(self.members, self.cores)]

    def union(self) -> set:
        out: set = set()
        for a in self.members:
            out |= a.elements
        return out


@dataclass(frozen=True)
class DisjointnessFailure:
    """Returned (not raised) when the greedy core construction fails."""

    index: int
    ratio: float

    def __bool__(self) -> bool:
        return False


def epsilon_disjoint_check(family: Sequence[FiniteSubset], eps: float):
    """Greedy cores B_i = A_i minus the points claimed by B_1..B_{i-1}.

    Returns a :class:`DisjointFamilyWitness`, or a :class:`DisjointnessFailure`
    naming the first member whose core is too small.  Greedy success is
    sufficient, not necessary, for ε-disjointness.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if not family:
        raise ValueError("family must be non-empty")
    claimed: set = set()
    cores = []
    for i, a in enumerate(family):
        core = a.elements - claimed
        ratio = len(core) / len(a)
        if not ratio > 1 - eps:
            return DisjointnessFailure(i, ratio)
        claimed |= core
        cores.append(FiniteSubset(frozenset(core), a.d))
    return DisjointFamilyWitness(tuple(family), tuple(cores), eps)


@dataclass(frozen=True)
class EvenCoverWitness:
    """The translates {S g : g in offsets} inside ``target``."""

    shape: FiniteSubset
    offsets: tuple
    target: FiniteSubset
    multiplicity_bound: int
    delta: float
    invariance: float = float("nan")

    @cached_property
    def members(self) -> list[FiniteSubset]:
        return [self.shape.translate(g) for g in self.offsets]

    @property
    def total_size(self) -> int:
        return len(self.shape) * len(self.offsets)

    def multiplicity(self) -> dict:
        counts: dict = {}
        for m in self.members:
            for g in m:
                counts[g] = counts.get(g, 0) + 1
        return counts


class _Canvas:
    """Dense boolean picture of a finite subset of Z^d over its bounding box."""

    def __init__(self, region: FiniteSubset):
        self.d = region.d
        arr = region.array()
        self.lo = arr.min(axis=0)
        self.shape = tuple(int(v) for v in arr.max(axis=0) - self.lo + 1)
        self.inside = np.zeros(self.shape, dtype=bool)
        self.inside[tuple((arr - self.lo).T)] = True

    def fitting_offsets(self, S: FiniteSubset, free: np.ndarray) -> np.ndarray:
        """Lexicographically sorted g with S g contained in ``free``."""
        s = S.array()
        smin, smax = s.min(axis=0), s.max(axis=0)
        span = tuple(int(n - (b - a)) for n, a, b in zip(self.shape, smin, smax))
        if any(v <= 0 for v in span):
            return np.zeros((0, self.d), dtype=np.int64)
        ok = np.ones(span, dtype=bool)
        for k in s:
            start = k - smin
            sl = tuple(slice(int(a), int(a) + n) for a, n in zip(start, span))
            ok &= free[sl]
        # position p in ``ok`` is the base point g = lo + p - smin
        return np.argwhere(ok) + self.lo - smin

    def indices(self, pts: np.ndarray) -> tuple:
        return tuple((pts - self.lo).T)


def _greedy_admit(canvas: _Canvas, S: FiniteSubset, offsets: np.ndarray, eps: float) -> tuple[list, np.ndarray]:
    """Admit translates S g in the given order while their unclaimed part
    exceeds (1 - eps)|S|; returns (admitted offsets, claimed mask)."""
    s = S.array()
    need = (1 - eps) * len(s)
    claimed = np.zeros(canvas.shape, dtype=bool)
    admitted = []
    for g in offsets:
        idx = canvas.indices(s + g)
        fresh = ~claimed[idx]
        if np.count_nonzero(fresh) > need:
            claimed[idx] = True
            admitted.append(tuple(int(c) for c in g))
    return admitted, claimed


def even_cover_translates(S: FiniteSubset, A: FiniteSubset, delta: float) -> EvenCoverWitness:
    """All right translates S g lying in A, with multiplicity bound M = |S|.

    The covering lemma promises a δ-even cover when A is (SS^{-1}, δ)-invariant;
    that hypothesis is only sufficient, so the even-cover conditions are
    checked directly and the call fails only when they do not hold.
    """
    if identity(S.d) not in S:
        raise PreconditionError("the shape must contain the identity")
    if not A:
        raise PreconditionError("target must be non-empty")
    ratio = invariance_ratio(A, set_product(S, inverse_set(S))).ratio
    canvas = _Canvas(A)
    offsets = canvas.fitting_offsets(S, canvas.inside)
    M = len(S)
    total = M * len(offsets)
    if total < (1 - delta) * M * len(A):
        raise PreconditionError(
            f"translates of S do not form a {delta}-even cover "
            f"(|B(A, SS^-1)|/|A| = {ratio:.6g})",
            ratio,
        )
    return EvenCoverWitness(
        S, tuple(tuple(int(c) for c in g) for g in offsets), A, M, delta, ratio
    )


def _is_even_cover(family: Sequence[FiniteSubset], A: FiniteSubset, delta: float) -> bool:
    counts: dict = {}
    total = 0
    for m in family:
        if not m.issubset(A):
            return False
        total += len(m)
        for g in m:
            counts[g] = counts.get(g, 0) + 1
    M = max(counts.values(), default=0)
    return M > 0 and total >= (1 - delta) * M * len(A)


def select_disjoint_subcover(
    family, A: FiniteSubset, eps: float, delta: float
) -> DisjointFamilyWitness:
    """Greedy ε-disjoint sub-collection of a δ-even cover of A.

    Candidates are processed in decreasing size, then lexicographic order; a
    set is admitted when its unclaimed part exceeds (1 - eps) of its size and
    that part becomes its core.  Covers at least eps(1 - delta)|A| points.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if isinstance(family, EvenCoverWitness):
        canvas = _Canvas(A)
        offs = np.array(family.offsets, dtype=np.int64).reshape(-1, A.d)
        admitted, _ = _greedy_admit(canvas, family.shape, offs, eps)
        members = [family.shape.translate(g) for g in admitted]
        witness = epsilon_disjoint_check(members, eps) if members else None
        if members and not witness:
            raise AssertionError("greedy admission produced a non-disjoint family")
        return witness or DisjointFamilyWitness((), (), eps)
    family = list(family)
    if not _is_even_cover(family, A, delta):
        raise PreconditionError(f"family is not a {delta}-even cover of A")
    order = sorted(family, key=lambda m: (-len(m), m.sorted()))
    claimed: set = set()
    members, cores = [], []
    for m in order:
        core = m.elements - claimed
        if len(core) > (1 - eps) * len(m):
            claimed |= core
            members.append(m)
            cores.append(FiniteSubset(frozenset(core), m.d))
    return DisjointFamilyWitness(tuple(members), tuple(cores), eps)


def choose_tiling_parameters(eps: float) -> tuple[int, float]:
    """Smallest k with (1 - eps/2)^k < eps, and delta = eps / (4 * 6^k)."""
    if not 0 < eps < 0.25:
        raise ValueError("eps must lie in (0, 1/4)")
    k = 1
    while (1 - eps / 2) ** k >= eps:
        k += 1
    return k, eps / (2 * 6**k * 2)


@dataclass
class QuasiTiling:
    shapes: list
    centers: list
    target: FiniteSubset
    epsilon: float
    coverage: float
    ok: bool = True
    problems: list = field(default_factory=list)

    def tiles(self, i: int) -> list[FiniteSubset]:
        return [self.shapes[i].translate(c) for c in self.centers[i]]

    def to_json(self) -> dict:
        return {
            "shapes": [s.to_json() for s in self.shapes],
            "centers": [c.to_json() for c in self.centers],
            "epsilon": self.epsilon,
            "coverage": self.coverage,
            "ok": self.ok,
            "problems": list(self.problems),
        }


def verify_quasi_tiling(q: QuasiTiling) -> list[str]:
    """Check the three quasi-tiling conditions by plain set arithmetic.

    Returns the list of violated conditions (empty when all hold).
    """
    problems = []
    target = q.target.elements
    placed: list[set] = []
    for i, shape in enumerate(q.shapes):
        tiles = q.tiles(i)
        union: set = set()
        for t in tiles:
            if not t.elements <= target:
                problems.append(f"shape {i}: a tile leaves the target")
                break
            union |= t.elements
        if tiles and not epsilon_disjoint_check(tiles, q.epsilon):
            problems.append(f"shape {i}: tiles are not {q.epsilon}-disjoint")
        placed.append(union)
    for i in range(len(placed)):
        for j in range(i + 1, len(placed)):
            if placed[i] & placed[j]:
                problems.append(f"shapes {i} and {j} overlap")
    covered = set().union(*placed) & target if placed else set()
    coverage = len(covered) / len(target)
    if abs(coverage - q.coverage) > 1e-12:
        problems.append("recorded coverage disagrees with recount")
    if coverage < 1 - q.epsilon:
        problems.append(f"coverage {coverage:.6g} below {1 - q.epsilon:.6g}")
    return problems


def quasi_tile(shapes: Sequence[FiniteSubset], target: FiniteSubset, eps: float) -> QuasiTiling:
    """ε-quasi-tile ``target`` by translates of ``shapes`` (listed smallest
    first), working down from the largest shape on the shrinking residual.

    Insufficient coverage is reported through ``ok``/``problems``, never raised.
    """
    if not 0 < eps < 0.25:
        raise ValueError("eps must lie in (0, 1/4)")
    if not target:
        raise ValueError("target must be non-empty")
    canvas = _Canvas(target)
    residual = canvas.inside.copy()
    centers: list = [None] * len(shapes)
    for i in reversed(range(len(shapes))):
        S = shapes[i]
        offsets = canvas.fitting_offsets(S, residual)
        admitted, claimed = _greedy_admit(canvas, S, offsets, eps)
        centers[i] = FiniteSubset(frozenset(admitted), target.d)
        residual &= ~claimed
    covered = np.count_nonzero(canvas.inside & ~residual)
    q = QuasiTiling(list(shapes), centers, target, eps, covered / len(target))
    q.problems = verify_quasi_tiling(q)
    q.ok = not q.problems
    return q
