"""The acting group Z^d: elements, finite subsets, boundaries and Følner sets.

Group elements are plain integer tuples. A :class:`FiniteSubset` is an
immutable set of elements of one fixed dimension that always iterates in
lexicographic order, so every greedy procedure built on top of it is
reproducible.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

Element = tuple[int, ...]


class DimensionMismatch(ValueError):
    pass


def identity(d: int) -> Element:
    return (0,) * d


def _check_dims(g: Element, h: Element) -> None:
    if len(g) != len(h):
        raise DimensionMismatch(f"dimension {len(g)} vs {len(h)}")


def multiply(g: Element, h: Element) -> Element:
    """Group law of Z^d (componentwise sum)."""
    _check_dims(g, h)
    return tuple(a + b for a, b in zip(g, h))


def inverse(g: Element) -> Element:
    return tuple(-a for a in g)


@dataclass(frozen=True)
class FiniteSubset:
    elements: frozenset
    d: int
    _sorted: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        for g in self.elements:
            if len(g) != self.d:
                raise DimensionMismatch(f"element {g} is not in Z^{self.d}")
        object.__setattr__(self, "_sorted", tuple(sorted(self.elements)))

    @classmethod
    def of(cls, points: Iterable[Sequence[int]], d: int | None = None) -> FiniteSubset:
        pts = [tuple(int(c) for c in p) for p in points]
        if d is None:
            if not pts:
                raise ValueError("cannot infer the dimension of an empty set")
            d = len(pts[0])
        return cls(frozenset(pts), d)

    @classmethod
    def empty(cls, d: int) -> FiniteSubset:
        return cls(frozenset(), d)

    @classmethod
    def interval(cls, a: int, b: int) -> FiniteSubset:
        """{a, ..., b-1} in Z."""
        return cls(frozenset((i,) for i in range(a, b)), 1)

    @classmethod
    def box(cls, lo: Sequence[int], hi: Sequence[int]) -> FiniteSubset:
        """Half-open box prod [lo_i, hi_i)."""
        ranges = [range(a, b) for a, b in zip(lo, hi)]
        return cls(frozenset(itertools.product(*ranges)), len(lo))

    @classmethod
    def cube(cls, n: int, d: int) -> FiniteSubset:
        return cls.box((0,) * d, (n,) * d)

    @classmethod
    def singleton(cls, g: Sequence[int]) -> FiniteSubset:
        g = tuple(g)
        return cls(frozenset([g]), len(g))

    def __iter__(self) -> Iterator[Element]:
        return iter(self._sorted)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, g) -> bool:
        return tuple(g) in self.elements

    def __bool__(self) -> bool:
        return bool(self.elements)

    def _same(self, other: FiniteSubset) -> None:
        if self.d != other.d:
            raise DimensionMismatch(f"dimension {self.d} vs {other.d}")

    def __or__(self, other: FiniteSubset) -> FiniteSubset:
        self._same(other)
        return FiniteSubset(self.elements | other.elements, self.d)

    def __and__(self, other: FiniteSubset) -> FiniteSubset:
        self._same(other)
        return FiniteSubset(self.elements & other.elements, self.d)

    def __sub__(self, other: FiniteSubset) -> FiniteSubset:
        self._same(other)
        return FiniteSubset(self.elements - other.elements, self.d)

    def issubset(self, other: FiniteSubset) -> bool:
        self._same(other)
        return self.elements <= other.elements

    def translate(self, g: Element) -> FiniteSubset:
        """Right translate Fg."""
        if len(g) != self.d:
            raise DimensionMismatch(f"dimension {self.d} vs {len(g)}")
        return FiniteSubset(frozenset(multiply(f, g) for f in self.elements), self.d)

    def sorted(self) -> tuple:
        return self._sorted

    def array(self) -> np.ndarray:
        """Elements as an (n, d) integer array in lexicographic order."""
        if not self._sorted:
            return np.zeros((0, self.d), dtype=np.int64)
        return np.array(self._sorted, dtype=np.int64)

    def bounds(self) -> tuple[Element, Element]:
        """Componentwise (min, max) of the elements."""
        if not self.elements:
            raise ValueError("empty set has no bounds")
        arr = self.array()
        return tuple(int(v) for v in arr.min(axis=0)), tuple(int(v) for v in arr.max(axis=0))

    def hull(self) -> FiniteSubset:
        lo, hi = self.bounds()
        return FiniteSubset.box(lo, tuple(h + 1 for h in hi))

    def to_json(self) -> list:
        return [list(g) for g in self._sorted]

    @classmethod
    def from_json(cls, data, d: int | None = None) -> FiniteSubset:
        if isinstance(data, str):
            data = json.loads(data)
        return cls.of(data, d)

    def __repr__(self) -> str:
        if len(self) <= 8:
            body = ", ".join(str(g[0]) if self.d == 1 else str(g) for g in self._sorted)
        else:
            body = f"{len(self)} elements"
        return f"FiniteSubset{{{body}}}"


def set_product(K: FiniteSubset, F: FiniteSubset) -> FiniteSubset:
    """KF = {kf : k in K, f in F}."""
    K._same(F)
    return FiniteSubset(frozenset(multiply(k, f) for k in K for f in F), K.d)


def inverse_set(K: FiniteSubset) -> FiniteSubset:
    return FiniteSubset(frozenset(inverse(k) for k in K), K.d)


def _grid(A: FiniteSubset, lo: np.ndarray, shape: tuple) -> np.ndarray:
    grid = np.zeros(shape, dtype=bool)
    if A:
        idx = A.array() - lo
        grid[tuple(idx.T)] = True
    return grid


def erosion_dilation(A: FiniteSubset, K: FiniteSubset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense masks of {g : Kg within A} and {g : Kg meets A} over the box
    spanned by K^{-1}A; returns (origin, erosion, dilation)."""
    A._same(K)
    a, k = A.array(), K.array()
    lo = a.min(axis=0) - k.max(axis=0)
    hi = a.max(axis=0) - k.min(axis=0)
    shape = tuple(int(v) for v in hi - lo + 1)
    width = k.max(axis=0) - k.min(axis=0)
    big_lo = a.min(axis=0) - width
    big_shape = tuple(int(v) for v in a.max(axis=0) + width - big_lo + 1)
    big = _grid(A, big_lo, big_shape)
    ero = np.ones(shape, dtype=bool)
    dil = np.zeros(shape, dtype=bool)
    for kk in k:
        start = lo + kk - big_lo
        sl = tuple(slice(int(s), int(s) + n) for s, n in zip(start, shape))
        ero &= big[sl]
        dil |= big[sl]
    return lo, ero, dil


def _from_mask(mask: np.ndarray, lo: np.ndarray, d: int) -> FiniteSubset:
    pts = np.argwhere(mask) + lo
    return FiniteSubset(frozenset(tuple(int(c) for c in p) for p in pts), d)


def boundary(A: FiniteSubset, K: FiniteSubset) -> FiniteSubset:
    """B(A, K) = {g : Kg meets both A and G \\ A}.

    Every such g lies in K^{-1}A, so only the box spanned by that finite
    set is scanned.
    """
    A._same(K)
    if not A or not K:
        return FiniteSubset.empty(A.d)
    lo, ero, dil = erosion_dilation(A, K)
    return _from_mask(dil & ~ero, lo, A.d)


def boundary_size(A: FiniteSubset, K: FiniteSubset) -> int:
    A._same(K)
    if not A or not K:
        return 0
    _, ero, dil = erosion_dilation(A, K)
    return int(np.count_nonzero(dil & ~ero))


@dataclass(frozen=True)
class InvarianceReport:
    boundary_size: int
    ratio: float
    satisfied: bool | None = None

    def to_dict(self) -> dict:
        return {"boundary_size": self.boundary_size, "ratio": self.ratio, "satisfied": self.satisfied}


def invariance_ratio(A: FiniteSubset, K: FiniteSubset, delta: float | None = None) -> InvarianceReport:
    if not A:
        raise ValueError("A must be non-empty")
    size = boundary_size(A, K)
    ratio = size / len(A)
    return InvarianceReport(size, ratio, None if delta is None else ratio < delta)


def interior(F: FiniteSubset, K: FiniteSubset) -> FiniteSubset:
    """{g in F : Kg is contained in F}."""
    F._same(K)
    if not F or not K:
        return F
    lo, ero, _ = erosion_dilation(F, K)
    return _from_mask(ero, lo, F.d) & F


def bracket_invariant(F: FiniteSubset, K: FiniteSubset, eps: float) -> bool:
    """[K, eps]-invariance: |{g in F : Kg in F}| > (1 - eps)|F|."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    return len(interior(F, K)) > (1 - eps) * len(F)


FOLNER_KINDS = ("box", "shifted_interval", "custom")


@dataclass(frozen=True)
class FolnerSequence:
    """A concrete Følner sequence in Z^d.

    ``box``: F_n = {0..n-1}^d.  ``shifted_interval``: F_n = {a_n, ..., a_n+n-1}
    in Z with a_n = sum_j coeffs[j] n^j.  ``custom``: an explicit finite list.
    """

    kind: str = "box"
    d: int = 1
    coeffs: tuple[int, ...] = ()
    sets: tuple[FiniteSubset, ...] = ()

    def __post_init__(self):
        if self.kind not in FOLNER_KINDS:
            raise ValueError(f"unknown Følner kind {self.kind!r}")
        if self.kind == "shifted_interval" and self.d != 1:
            raise ValueError("shifted_interval sequences live in Z")

    def shift(self, n: int) -> int:
        return sum(c * n**j for j, c in enumerate(self.coeffs))

    def __call__(self, n: int) -> FiniteSubset:
        return folner(self, n)

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind, "d": self.d}
        if self.kind == "shifted_interval":
            out["coeffs"] = list(self.coeffs)
        if self.kind == "custom":
            out["sets"] = [s.to_json() for s in self.sets]
        return out

    @classmethod
    def from_json(cls, data) -> FolnerSequence:
        if isinstance(data, str):
            data = json.loads(data)
        kind = data.get("kind", "box")
        d = int(data.get("d", 1))
        sets = tuple(FiniteSubset.of(s, d) for s in data.get("sets", ()))
        return cls(kind, d, tuple(int(c) for c in data.get("coeffs", ())), sets)


def folner(seq: FolnerSequence, n: int) -> FiniteSubset:
    if n < 1:
        raise ValueError("Følner index starts at 1")
    if seq.kind == "box":
        return FiniteSubset.cube(n, seq.d)
    if seq.kind == "shifted_interval":
        a = seq.shift(n)
        return FiniteSubset.interval(a, a + n)
    if n > len(seq.sets):
        raise IndexError(f"custom sequence has only {len(seq.sets)} members")
    F = seq.sets[n - 1]
    if len(F) < n:
        raise ValueError(f"custom member {n} has fewer than {n} elements")
    return F


def select_tiling_indices(
    seq: FolnerSequence, k: int, delta: float, start: int = 1, scan_limit: int = 400
) -> list[int] | None:
    """Scan a Følner sequence for n_1 < ... < n_k with F_{n_{i+1}}
    (F_{n_i}F_{n_i}^{-1}, delta)-invariant and |F_{n_i}|/|F_{n_{i+1}}| < delta.

    Returns None when the scan limit is reached first.
    """
    chosen = [start]
    n = start + 1
    while len(chosen) < k and n <= scan_limit:
        prev = seq(chosen[-1])
        cur = seq(n)
        if len(prev) / len(cur) < delta:
            K = set_product(prev, inverse_set(prev))
            if invariance_ratio(cur, K).ratio < delta:
                chosen.append(n)
        n += 1
    return chosen if len(chosen) == k else None
