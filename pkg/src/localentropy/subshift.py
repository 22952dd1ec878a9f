"""Subshifts of finite type over Z^d, window languages, cylinder sets and covers.

Shift convention: (gx)_h = x_{h+g}.  Consequently the set {x : gx in U} is U
with every cylinder shape moved by +g, which is what :func:`translate` does.

Window languages are numpy tables of symbol indices, one row per pattern,
rows in lexicographic order (columns follow the window's sorted elements).
In d = 1 the language is exact: it is read off the trimmed higher-block
transfer graph, so every word is extendable to a bi-infinite point.  In
d >= 2 it is the projection of the locally admissible patterns on the window
padded by ``margin`` and is flagged approximate.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .group import DimensionMismatch, Element, FiniteSubset


class EmptyLanguage(ValueError):
    """The SFT admits no configuration (or no pattern on the window)."""


class WindowTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple

    def __post_init__(self):
        syms = tuple(str(s) for s in self.symbols)
        if not syms:
            raise ValueError("alphabet must be non-empty")
        if len(set(syms)) != len(syms):
            raise ValueError("alphabet symbols must be distinct")
        if len(syms) > 255:
            raise ValueError("at most 255 symbols are supported")
        object.__setattr__(self, "symbols", syms)

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    @cached_property
    def _index(self) -> dict:
        return {s: i for i, s in enumerate(self.symbols)}

    def index(self, symbol) -> int:
        try:
            return self._index[str(symbol)]
        except KeyError:
            raise ValueError(f"symbol {symbol!r} not in alphabet") from None


@dataclass(frozen=True)
class Pattern:
    """An assignment of symbols to the points of a finite shape.

    ``values`` is aligned with the sorted order of ``shape``.
    """

    shape: FiniteSubset
    values: tuple

    def __post_init__(self):
        vals = tuple(str(v) for v in self.values)
        if len(vals) != len(self.shape):
            raise ValueError("assignment must be total on the shape")
        object.__setattr__(self, "values", vals)

    @classmethod
    def of(cls, mapping: dict | Iterable, d: int | None = None) -> Pattern:
        """Build from {point: symbol} or an iterable of (point, symbol)."""
        items = mapping.items() if isinstance(mapping, dict) else mapping
        pairs = sorted(((tuple(int(c) for c in (p if isinstance(p, (tuple, list)) else (p,))), str(v)) for p, v in items))
        if d is None:
            if not pairs:
                raise ValueError("cannot infer the dimension of an empty pattern")
            d = len(pairs[0][0])
        shape = FiniteSubset(frozenset(p for p, _ in pairs), d)
        if len(shape) != len(pairs):
            raise ValueError("repeated point in pattern")
        return cls(shape, tuple(v for _, v in pairs))

    @classmethod
    def word(cls, symbols: Sequence, start: int = 0) -> Pattern:
        """The 1-d pattern symbols[0] at start, symbols[1] at start+1, ..."""
        return cls(FiniteSubset.interval(start, start + len(symbols)), tuple(str(s) for s in symbols))

    @classmethod
    def empty(cls, d: int) -> Pattern:
        return cls(FiniteSubset.empty(d), ())

    @property
    def d(self) -> int:
        return self.shape.d

    def items(self):
        return zip(self.shape.sorted(), self.values)

    def as_dict(self) -> dict:
        return dict(self.items())

    def at(self, g: Element) -> str:
        return self.as_dict()[tuple(g)]

    def translate(self, g: Element) -> Pattern:
        return Pattern(self.shape.translate(g), self.values)

    def restrict(self, sub: FiniteSubset) -> Pattern:
        a = self.as_dict()
        return Pattern.of({p: a[p] for p in sub}, self.d)

    def merge(self, other: Pattern) -> Pattern | None:
        """The pattern on the union of shapes, or None if they disagree."""
        a = self.as_dict()
        for p, v in other.items():
            if a.setdefault(p, v) != v:
                return None
        return Pattern.of(a, self.d)

    def to_json(self) -> dict:
        return {"shape": self.shape.to_json(), "assign": list(self.values)}

    @classmethod
    def from_json(cls, data, d: int | None = None) -> Pattern:
        shape = [tuple(int(c) for c in p) for p in data["shape"]]
        assign = [str(v) for v in data["assign"]]
        if len(shape) != len(assign):
            raise ValueError("shape and assign lengths differ")
        if not shape:
            return cls.empty(d or 1)
        return cls.of(list(zip(shape, assign)), d)

    def __repr__(self) -> str:
        if self.d == 1 and self.shape and len(self.shape.hull()) == len(self.shape):
            return f"[{''.join(self.values)} at {self.shape.sorted()[0][0]}]"
        return "[" + ", ".join(f"{p}:{v}" for p, v in self.items()) + "]"


@dataclass(frozen=True)
class SymbolicSet:
    """A finite union of cylinder sets; no cylinders is the empty set and the
    empty-shape cylinder is the whole space."""

    cylinders: tuple
    d: int = 1

    def __post_init__(self):
        cyl = tuple(dict.fromkeys(self.cylinders))
        for c in cyl:
            if c.d != self.d:
                raise DimensionMismatch(f"cylinder of dimension {c.d} in a Z^{self.d} set")
        object.__setattr__(self, "cylinders", cyl)

    @classmethod
    def full(cls, d: int = 1) -> SymbolicSet:
        return cls((Pattern.empty(d),), d)

    @classmethod
    def empty(cls, d: int = 1) -> SymbolicSet:
        return cls((), d)

    @classmethod
    def cylinder(cls, p: Pattern) -> SymbolicSet:
        return cls((p,), p.d)

    @classmethod
    def union_of(cls, patterns: Iterable[Pattern], d: int = 1) -> SymbolicSet:
        return cls(tuple(patterns), d)

    def is_full_symbolically(self) -> bool:
        return any(len(c.shape) == 0 for c in self.cylinders)

    def is_empty_symbolically(self) -> bool:
        return not self.cylinders

    def shape(self) -> FiniteSubset:
        out = FiniteSubset.empty(self.d)
        for c in self.cylinders:
            out = out | c.shape
        return out

    def translate(self, g: Element) -> SymbolicSet:
        return SymbolicSet(tuple(c.translate(g) for c in self.cylinders), self.d)

    def union(self, other: SymbolicSet) -> SymbolicSet:
        return SymbolicSet(self.cylinders + other.cylinders, self.d)

    def intersect(self, other: SymbolicSet) -> SymbolicSet:
        out = []
        for a in self.cylinders:
            for b in other.cylinders:
                m = a.merge(b)
                if m is not None:
                    out.append(m)
        return SymbolicSet(tuple(out), self.d)

    def to_json(self) -> list:
        return [c.to_json() for c in self.cylinders]

    @classmethod
    def from_json(cls, data, d: int | None = None) -> SymbolicSet:
        if d is None:
            d = next((len(c["shape"][0]) for c in data if c["shape"]), 1)
        return cls(tuple(Pattern.from_json(c, d) for c in data), d)

    def __repr__(self) -> str:
        if not self.cylinders:
            return "∅"
        if self.is_full_symbolically():
            return "X"
        return " ∪ ".join(repr(c) for c in self.cylinders)


@dataclass(frozen=True)
class Cover:
    elements: tuple
    kind: str = "open"

    def __post_init__(self):
        els = tuple(self.elements)
        if not els:
            raise ValueError("a cover needs at least one element")
        if self.kind not in ("open", "borel"):
            raise ValueError("kind must be 'open' or 'borel'")
        d = els[0].d
        if any(e.d != d for e in els):
            raise DimensionMismatch("cover elements of different dimensions")
        object.__setattr__(self, "elements", els)

    @property
    def d(self) -> int:
        return self.elements[0].d

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def is_partition(self) -> bool:
        return False

    def domain(self) -> FiniteSubset:
        """Union of all cylinder shapes."""
        out = FiniteSubset.empty(self.d)
        for e in self.elements:
            out = out | e.shape()
        return out

    def translate(self, g: Element):
        return type(self)(tuple(e.translate(g) for e in self.elements), self.kind)

    def to_json(self) -> list:
        return [e.to_json() for e in self.elements]

    @classmethod
    def from_json(cls, data, d: int | None = None, kind: str = "open"):
        if isinstance(data, str):
            data = json.loads(data)
        if d is None:
            d = next((len(c["shape"][0]) for e in data for c in e if c["shape"]), 1)
        return cls(tuple(SymbolicSet.from_json(e, d) for e in data), kind)

    @classmethod
    def trivial(cls, d: int = 1):
        return cls((SymbolicSet.full(d),))


@dataclass(frozen=True)
class Partition(Cover):
    """A cover whose elements are pairwise disjoint (checked on windows)."""

    kind: str = "borel"

    @property
    def is_partition(self) -> bool:
        return True


def symbol_partition(alphabet: Alphabet, d: int = 1, at: Element | None = None) -> Partition:
    at = tuple(at) if at is not None else (0,) * d
    return Partition(tuple(SymbolicSet.cylinder(Pattern.of({at: s}, d)) for s in alphabet))


def _check_same_dims(a, b):
    if a != b:
        raise DimensionMismatch(f"dimension {a} vs {b}")


# ---------------------------------------------------------------------------
# Shifts of finite type


@dataclass(frozen=True)
class SFT:
    alphabet: Alphabet
    d: int = 1
    forbidden: tuple = ()
    factors: tuple = ()
    name: str = ""

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        fb = tuple(self.forbidden)
        for p in fb:
            if p.d != self.d:
                raise DimensionMismatch(f"forbidden pattern of dimension {p.d} in a Z^{self.d} shift")
            if not p.shape:
                raise EmptyLanguage("the empty pattern is forbidden: the shift is empty")
            for v in p.values:
                self.alphabet.index(v)
        object.__setattr__(self, "forbidden", fb)

    # -- constructors ------------------------------------------------------

    @classmethod
    def full_shift(cls, k: int | Sequence = 2, d: int = 1) -> SFT:
        syms = [str(i) for i in range(k)] if isinstance(k, int) else list(k)
        return cls(Alphabet(tuple(syms)), d, (), name=f"full {len(syms)}-shift")

    @classmethod
    def golden_mean(cls) -> SFT:
        return cls(Alphabet(("0", "1")), 1, (Pattern.word("11"),), name="golden mean")

    @classmethod
    def periodic_orbit(cls, word: str) -> SFT:
        """The finite subshift consisting of the shift orbit of ...www...

        Forbids every (p+1)-word that does not occur in the periodic point.
        """
        p = len(word)
        syms = sorted(set(word))
        occurring = {(word * 3)[i : i + p + 1] for i in range(p)}
        forb = tuple(
            Pattern.word(w)
            for w in ("".join(t) for t in itertools.product(syms, repeat=p + 1))
            if w not in occurring
        )
        return cls(Alphabet(tuple(syms)), 1, forb, name=f"orbit of {word}")

    def to_json(self) -> dict:
        return {
            "alphabet": list(self.alphabet.symbols),
            "d": self.d,
            "forbidden": [p.to_json() for p in self.forbidden],
        }

    @classmethod
    def from_json(cls, data) -> SFT:
        if isinstance(data, str):
            data = json.loads(data)
        d = int(data.get("d", 1))
        alphabet = Alphabet(tuple(str(s) for s in data["alphabet"]))
        forb = tuple(Pattern.from_json(p, d) for p in data.get("forbidden", ()))
        return cls(alphabet, d, forb, name=str(data.get("name", "")))

    # -- d = 1 transfer graph ----------------------------------------------

    @cached_property
    def memory(self) -> int:
        """Block length m of the higher-block presentation (edges are (m+1)-words)."""
        spans = [p.shape.bounds()[1][0] - p.shape.bounds()[0][0] + 1 for p in self.forbidden]
        return max([1] + [s - 1 for s in spans])

    def _block_ok(self, block: np.ndarray) -> np.ndarray:
        """Rows of ``block`` (n, L) containing no forbidden pattern."""
        ok = np.ones(len(block), dtype=bool)
        L = block.shape[1]
        for p in self.forbidden:
            arr = p.shape.array()[:, 0]
            arr = arr - arr.min()
            vals = np.array([self.alphabet.index(v) for v in p.values], dtype=np.uint8)
            for t in range(L - int(arr.max())):
                ok &= ~(block[:, arr + t] == vals).all(axis=1)
        return ok

    @cached_property
    def graph(self) -> tuple[np.ndarray, np.ndarray]:
        """(states, edges) of the trimmed higher-block graph.

        states: (S, m) symbol blocks in lexicographic order; edges: (E, 2)
        sorted (src, dst) pairs.  Every state lies on a bi-infinite path.
        """
        if self.d != 1:
            raise ValueError("transfer graphs are only built for d = 1")
        k, m = len(self.alphabet), self.memory
        blocks = np.array(list(itertools.product(range(k), repeat=m + 1)), dtype=np.uint8)
        blocks = blocks[self._block_ok(blocks)]
        states = np.array(list(itertools.product(range(k), repeat=m)), dtype=np.uint8)
        states = states[self._block_ok(states)]
        code = {bytes(s): i for i, s in enumerate(states)}
        src = np.array([code.get(bytes(b[:m]), -1) for b in blocks], dtype=np.int64)
        dst = np.array([code.get(bytes(b[1:]), -1) for b in blocks], dtype=np.int64)
        keep = (src >= 0) & (dst >= 0)
        src, dst = src[keep], dst[keep]
        alive = np.ones(len(states), dtype=bool)
        while True:
            live_edge = alive[src] & alive[dst]
            has_out = np.zeros(len(states), dtype=bool)
            has_in = np.zeros(len(states), dtype=bool)
            has_out[src[live_edge]] = True
            has_in[dst[live_edge]] = True
            new = alive & has_in & has_out
            if (new == alive).all():
                break
            alive = new
        if not alive.any():
            raise EmptyLanguage(f"{self.name or 'SFT'} has no bi-infinite configuration")
        remap = -np.ones(len(states), dtype=np.int64)
        remap[alive] = np.arange(int(alive.sum()))
        live_edge = alive[src] & alive[dst]
        edges = np.stack([remap[src[live_edge]], remap[dst[live_edge]]], axis=1)
        order = np.lexsort((edges[:, 1], edges[:, 0]))
        return states[alive], edges[order]

    @cached_property
    def adjacency(self) -> np.ndarray:
        states, edges = self.graph
        A = np.zeros((len(states), len(states)))
        A[edges[:, 0], edges[:, 1]] = 1.0
        return A

    def entropy(self) -> float:
        """Topological entropy log ρ(A) of the transfer graph (d = 1)."""
        rho = max(abs(np.linalg.eigvals(self.adjacency)))
        return float(np.log(rho)) if rho > 0 else 0.0

    @cached_property
    def components(self) -> list[np.ndarray]:
        """State sets of the nontrivial strongly connected components."""
        from scipy.sparse import csr_matrix
        from scipy.sparse.csgraph import connected_components

        A = self.adjacency
        n, labels = connected_components(csr_matrix(A), directed=True, connection="strong")
        out = []
        for c in range(n):
            idx = np.flatnonzero(labels == c)
            if len(idx) > 1 or A[idx[0], idx[0]] > 0:
                out.append(idx)
        return out

    def _constraint_dp(self, pattern: Pattern, allowed: np.ndarray | None = None, span: tuple[int, int] | None = None):
        """Forward and backward reachable-state sets along the positions of
        ``span`` (default: the pattern's hull, widened to at least m points).

        Returns (a, L, fwd, bwd, states) where fwd[t] marks states (blocks
        starting at a+t) reachable from the left consistent with the
        constraints, and bwd[t] those from which the right end is reachable.
        """
        states, edges = self.graph
        m = self.memory
        S = len(states)
        cons = {p[0]: self.alphabet.index(v) for p, v in pattern.items()}
        if span is None:
            if cons:
                a, b = min(cons), max(cons)
            else:
                a, b = 0, 0
        else:
            a, b = span
        L = max(b - a + 1, m)
        T = L - m + 1  # number of block positions
        ok = np.ones((T, S), dtype=bool) if allowed is None else np.tile(allowed, (T, 1))
        for pos, v in cons.items():
            for t in range(max(0, pos - a - m + 1), min(T, pos - a + 1)):
                ok[t] &= states[:, pos - a - t] == v
        fwd = np.zeros((T, S), dtype=bool)
        fwd[0] = ok[0]
        for t in range(1, T):
            reach = np.zeros(S, dtype=bool)
            reach[edges[fwd[t - 1][edges[:, 0]], 1]] = True
            fwd[t] = reach & ok[t]
        bwd = np.zeros((T, S), dtype=bool)
        bwd[T - 1] = ok[T - 1]
        for t in range(T - 2, -1, -1):
            reach = np.zeros(S, dtype=bool)
            reach[edges[bwd[t + 1][edges[:, 1]], 0]] = True
            bwd[t] = reach & ok[t]
        return a, L, fwd, bwd, states

    def admissible(self, pattern: Pattern, margin: int = 2) -> bool:
        """Whether the cylinder of ``pattern`` is a nonempty subset of X
        (exact for d = 1; locally admissible with margin otherwise)."""
        _check_same_dims(pattern.d, self.d)
        if not pattern.shape:
            return True
        if self.d == 1:
            _, _, fwd, _, _ = self._constraint_dp(pattern)
            return bool(fwd[-1].any())
        return len(self.language(pattern.shape, margin, restrict=pattern)) > 0

    def in_support(self, pattern: Pattern) -> bool:
        """Whether the cylinder meets the support of some invariant measure,
        i.e. the word is a path inside one nontrivial strongly connected
        component of the transfer graph (d = 1; assumed True for d >= 2)."""
        if self.d != 1:
            return True
        for comp in self.components:
            allowed = np.zeros(len(self.graph[0]), dtype=bool)
            allowed[comp] = True
            _, _, fwd, _, _ = self._constraint_dp(pattern, allowed)
            if fwd[-1].any():
                return True
        return False

    def extend_lex_least(self, pattern: Pattern, window: FiniteSubset) -> Pattern:
        """The lexicographically least admissible pattern on ``window`` (d = 1)
        agreeing with ``pattern``; positions of ``window`` are filled left to
        right, each with the least symbol keeping the rest extendable."""
        if self.d != 1:
            raise ValueError("lex-least extension is implemented for d = 1")
        if not pattern.shape.issubset(window):
            raise WindowTooSmall("pattern shape must lie inside the window")
        lo = min(window.sorted()[0][0], pattern.shape.sorted()[0][0] if pattern.shape else 0)
        hi = max(window.sorted()[-1][0], pattern.shape.sorted()[-1][0] if pattern.shape else 0)
        fixed = pattern.as_dict()
        for g in window:
            if g in fixed:
                continue
            for s in self.alphabet:
                trial = Pattern.of({**fixed, g: s}, 1)
                _, _, fwd, _, _ = self._constraint_dp(trial, span=(lo, hi))
                if fwd[-1].any():
                    fixed[g] = s
                    break
            else:
                raise EmptyLanguage(f"{pattern!r} is not admissible")
        if not self.admissible(Pattern.of(fixed, 1)):
            raise EmptyLanguage(f"{pattern!r} is not admissible")
        return Pattern.of(fixed, 1)

    # -- languages ---------------------------------------------------------

    def language(self, window: FiniteSubset, margin: int = 2, restrict: Pattern | None = None) -> Language:
        _check_same_dims(window.d, self.d)
        if margin < 0:
            raise ValueError("margin must be >= 0")
        if self.d == 1:
            table = _language_1d(self, window, restrict)
            exact = True
        else:
            table = _language_nd(self, window, margin, restrict)
            exact = not self.forbidden
        if len(table) == 0 and restrict is None:
            raise EmptyLanguage(f"empty language on window {window!r}")
        return Language(self, window, table, exact, margin)


def _language_1d(sft: SFT, window: FiniteSubset, restrict: Pattern | None) -> np.ndarray:
    states, edges = sft.graph
    m = sft.memory
    pts = [g[0] for g in window]
    if not pts:
        return np.zeros((1, 0), dtype=np.uint8)
    a, b = pts[0], pts[-1]
    if restrict is not None and restrict.shape:
        a = min(a, restrict.shape.sorted()[0][0])
        b = max(b, restrict.shape.sorted()[-1][0])
    in_window = set(pts)
    cons = {p[0]: sft.alphabet.index(v) for p, v in restrict.items()} if restrict is not None else {}
    L = max(b - a + 1, m)
    out_deg = np.bincount(edges[:, 0], minlength=len(states))
    first_edge = np.concatenate([[0], np.cumsum(out_deg)[:-1]])

    state = np.arange(len(states), dtype=np.int64)
    for pos, v in cons.items():
        if pos - a < m:
            state = state[states[state, pos - a] == v]
    kept_cols = [states[state, t] for t in range(m) if a + t in in_window]
    table = np.stack(kept_cols, axis=1) if kept_cols else np.zeros((len(state), 0), dtype=np.uint8)
    dirty = m > 1 and len(kept_cols) < m
    for t in range(m, L):
        pos = a + t
        reps = out_deg[state]
        base = np.repeat(first_edge[state], reps)
        local = np.arange(int(reps.sum())) - np.repeat(np.cumsum(reps) - reps, reps)
        table = np.repeat(table, reps, axis=0)
        state = edges[base + local, 1]
        sym = states[state, m - 1]
        if pos in cons:
            keep = sym == cons[pos]
            table, state, sym = table[keep], state[keep], sym[keep]
        if pos in in_window:
            table = np.concatenate([table, sym[:, None]], axis=1)
        else:
            dirty = True
        if dirty and (pos not in in_window or t == L - 1):
            both = np.concatenate([state[:, None].astype(np.int64), table.astype(np.int64)], axis=1)
            both = np.unique(both, axis=0)
            state, table = both[:, 0], both[:, 1:].astype(np.uint8)
    if dirty or L > b - a + 1:
        table = np.unique(table, axis=0) if len(table) else table
    return np.ascontiguousarray(table, dtype=np.uint8)


def _language_nd(sft: SFT, window: FiniteSubset, margin: int, restrict: Pattern | None) -> np.ndarray:
    """Frontier dynamic programme over the padded box in lexicographic cell
    order; columns are dropped as soon as no pending forbidden placement and
    no window cell needs them, with deduplication after every drop."""
    if not window:
        return np.zeros((1, 0), dtype=np.uint8)
    lo, hi = window.bounds()
    if restrict is not None and restrict.shape:
        rlo, rhi = restrict.shape.bounds()
        lo = tuple(min(x, y) for x, y in zip(lo, rlo))
        hi = tuple(max(x, y) for x, y in zip(hi, rhi))
    lo = tuple(v - margin for v in lo)
    hi = tuple(v + margin for v in hi)
    box = FiniteSubset.box(lo, tuple(v + 1 for v in hi))
    cells = box.sorted()
    order = {c: i for i, c in enumerate(cells)}
    cons = {p: sft.alphabet.index(v) for p, v in restrict.items()} if restrict is not None else {}
    k = len(sft.alphabet)

    checks: dict[int, list] = {}
    last_use = {c: -1 for c in cells}
    for p in sft.forbidden:
        pts = p.shape.array()
        vals = np.array([sft.alphabet.index(v) for v in p.values], dtype=np.uint8)
        plo, phi = pts.min(axis=0), pts.max(axis=0)
        ranges = [range(int(l - a), int(h - b) + 1) for l, h, a, b in zip(lo, hi, plo, phi)]
        for t in itertools.product(*ranges):
            placed = [tuple(int(c) for c in q) for q in pts + np.array(t)]
            idx = [order[q] for q in placed]
            done = max(idx)
            checks.setdefault(done, []).append((placed, vals))
            for q in placed:
                last_use[q] = max(last_use[q], done)
    win = window.elements

    cols: list = []
    table = np.zeros((1, 0), dtype=np.uint8)
    for i, c in enumerate(cells):
        n = len(table)
        choices = [cons[c]] if c in cons else list(range(k))
        table = np.concatenate(
            [np.repeat(table, len(choices), axis=0), np.tile(np.array(choices, dtype=np.uint8), n)[:, None]], axis=1
        )
        cols.append(c)
        pos = {q: j for j, q in enumerate(cols)}
        for placed, vals in checks.get(i, ()):
            idx = [pos[q] for q in placed]
            table = table[~(table[:, idx] == vals).all(axis=1)]
        keep = [j for j, q in enumerate(cols) if q in win or last_use[q] > i]
        if len(keep) < len(cols):
            cols = [cols[j] for j in keep]
            table = np.unique(table[:, keep], axis=0) if len(table) else table[:, keep]
    # reorder columns into window order
    pos = {q: j for j, q in enumerate(cols)}
    table = table[:, [pos[q] for q in window.sorted()]]
    return np.unique(table, axis=0) if len(table) else table


@dataclass
class Language:
    """Patterns on ``window``: ``table[i, j]`` is the symbol index at the
    j-th point of the window (sorted order)."""

    sft: SFT
    window: FiniteSubset
    table: np.ndarray
    exact: bool = True
    margin: int = 0

    def __len__(self) -> int:
        return len(self.table)

    @cached_property
    def column(self) -> dict:
        return {g: j for j, g in enumerate(self.window.sorted())}

    def columns(self, shape: Iterable[Element]) -> list[int]:
        try:
            return [self.column[tuple(g)] for g in shape]
        except KeyError as exc:
            raise WindowTooSmall(f"point {exc.args[0]} lies outside the window") from None

    def pattern(self, i: int) -> Pattern:
        syms = self.sft.alphabet.symbols
        return Pattern(self.window, tuple(syms[v] for v in self.table[i]))

    def patterns(self) -> list[Pattern]:
        return [self.pattern(i) for i in range(len(self))]

    def words(self) -> list[str]:
        syms = self.sft.alphabet.symbols
        sep = "" if all(len(s) == 1 for s in syms) else ","
        return [sep.join(syms[v] for v in row) for row in self.table]

    @cached_property
    def _row_index(self) -> dict:
        return {bytes(r): i for i, r in enumerate(self.table)}

    def index(self, p: Pattern) -> int:
        if p.shape != self.window:
            raise ValueError("pattern is not on this window")
        key = bytes(np.array([self.sft.alphabet.index(v) for v in p.values], dtype=np.uint8))
        return self._row_index.get(key, -1)

    def cylinder_mask(self, p: Pattern) -> np.ndarray:
        if not p.shape:
            return np.ones(len(self), dtype=bool)
        cols = self.columns(p.shape)
        vals = np.array([self.sft.alphabet.index(v) for v in p.values], dtype=np.uint8)
        return (self.table[:, cols] == vals).all(axis=1)

    def mask(self, U: SymbolicSet) -> np.ndarray:
        """Rows whose cylinder lies in U (U's shapes must fit the window)."""
        out = np.zeros(len(self), dtype=bool)
        for c in U.cylinders:
            out |= self.cylinder_mask(c)
        return out

    def project(self, sub: FiniteSubset) -> tuple[Language, np.ndarray]:
        """Restriction to a sub-window; returns the projected language and the
        row map from this language into it."""
        cols = self.columns(sub)
        proj, inv = np.unique(self.table[:, cols], axis=0, return_inverse=True)
        return Language(self.sft, sub, proj, self.exact, self.margin), inv.reshape(-1)

    def symbolic(self, mask: np.ndarray) -> SymbolicSet:
        return SymbolicSet(tuple(self.pattern(i) for i in np.flatnonzero(mask)), self.window.d)


# ---------------------------------------------------------------------------
# Set and cover operations


def translate(U, g: Element):
    """{x : gx in U}: shapes move by +g under (gx)_h = x_{h+g}."""
    return U.translate(tuple(g))


def _nonempty(U: SymbolicSet, sft: SFT | None, margin: int = 2) -> bool:
    if sft is None:
        return bool(U.cylinders)
    return any(sft.admissible(c, margin) for c in U.cylinders)


def join(covers: Sequence[Cover], sft: SFT | None = None, margin: int = 2) -> Cover:
    """All intersections U_1 ∩ ... ∩ U_n with empty ones dropped.  Emptiness
    is decided in ``sft`` when given, otherwise only symbolic conflicts count."""
    if not covers:
        raise ValueError("join of no covers")
    d = covers[0].d
    out: list = []
    seen: set = set()
    for combo in itertools.product(*(c.elements for c in covers)):
        acc = SymbolicSet.full(d)
        for e in combo:
            acc = _simplify(acc.intersect(e))
        if not _nonempty(acc, sft, margin):
            continue
        if sft is not None:
            acc = SymbolicSet(tuple(c for c in acc.cylinders if sft.admissible(c, margin)), d)
        key = frozenset(acc.cylinders)
        if key not in seen:
            seen.add(key)
            out.append(acc)
    if not out:
        raise EmptyLanguage("join is empty")
    cls = Partition if all(c.is_partition for c in covers) else Cover
    kind = "borel" if any(c.kind == "borel" for c in covers) else "open"
    return cls(tuple(out), kind)


def _simplify(U: SymbolicSet) -> SymbolicSet:
    """Drop the full-space cylinder when other cylinders exist alongside it
    only if it is the sole one; otherwise keep normal form as is."""
    if U.is_full_symbolically():
        return SymbolicSet.full(U.d)
    return U


def cover_pullback(U: Cover, F: FiniteSubset, sft: SFT | None = None) -> Cover:
    """U_F = join of g^{-1}U over g in F, with U_∅ = {X}."""
    if not F:
        return Cover.trivial(U.d)
    return join([translate(U, g) for g in F], sft)


# -- windowed families ---------------------------------------------------------


@dataclass
class WindowedCover:
    """A family of subsets of a window language, one boolean row per element."""

    lang: Language
    masks: np.ndarray

    def __len__(self) -> int:
        return len(self.masks)

    def covers(self) -> bool:
        return bool(self.masks.any(axis=0).all()) if len(self.lang) else True

    def uncovered(self) -> np.ndarray:
        return np.flatnonzero(~self.masks.any(axis=0))

    def nonempty(self) -> WindowedCover:
        return WindowedCover(self.lang, self.masks[self.masks.any(axis=1)])

    def dedupe(self) -> WindowedCover:
        if len(self.masks) <= 1:
            return self
        packed = np.packbits(self.masks, axis=1)
        _, first = np.unique(packed, axis=0, return_index=True)
        return WindowedCover(self.lang, self.masks[np.sort(first)])

    def is_partition(self) -> bool:
        return bool((self.masks.sum(axis=0) == 1).all())

    def labels(self) -> np.ndarray:
        """Element index per pattern (partitions only)."""
        if not self.is_partition():
            raise ValueError("not a partition on this window")
        return np.argmax(self.masks, axis=0)

    def atom_labels(self) -> np.ndarray:
        """Atom index per pattern: patterns are in the same atom of the
        generated partition iff they lie in exactly the same elements."""
        if len(self.masks) == 0:
            return np.zeros(len(self.lang), dtype=np.int64)
        _, inv = np.unique(self.masks.T, axis=0, return_inverse=True)
        return inv.reshape(-1)


def restrict(U: Cover, lang: Language) -> WindowedCover:
    return WindowedCover(lang, np.array([lang.mask(e) for e in U.elements], dtype=bool).reshape(len(U), len(lang)))


def pullback_window(U: Cover, F: FiniteSubset) -> FiniteSubset:
    """The window D F covering all shapes of U_F (D = domain of U)."""
    D = U.domain()
    if not D:
        D = FiniteSubset.singleton((0,) * U.d)
    if not F:
        return D
    from .group import set_product

    return set_product(D, F)


def pullback_labels(U: Cover, F: FiniteSubset, lang: Language) -> np.ndarray:
    """Atom labels of U_F on ``lang`` for a partition U (fast path)."""
    lab = np.zeros(len(lang), dtype=np.int64)
    for g in F:
        wg = restrict(translate(U, g), lang)
        lg = wg.labels()
        lab = lab * len(U) + lg
        _, lab = np.unique(lab, return_inverse=True)
        lab = lab.reshape(-1)
    return lab


def pullback_masks(U: Cover, F: FiniteSubset, lang: Language, prune: bool = True, limit: int = 200_000) -> WindowedCover:
    """Elements of U_F restricted to ``lang`` by incremental join.

    Empty and duplicate intersections are dropped at every step; with
    ``prune`` an element contained in another is dropped too (this changes
    neither N(U_F) nor the family of partitions finer than U_F).
    """
    base = [restrict(translate(U, g), lang).masks for g in F]
    cur = np.ones((1, len(lang)), dtype=bool)
    for mg in base:
        nxt = (cur[:, None, :] & mg[None, :, :]).reshape(-1, len(lang))
        w = WindowedCover(lang, nxt).nonempty().dedupe()
        cur = prune_dominated(w.masks) if prune else w.masks
        if len(cur) > limit:
            raise MemoryError(f"U_F has more than {limit} distinct elements on this window")
    return WindowedCover(lang, cur)


def prune_dominated(masks: np.ndarray) -> np.ndarray:
    """Drop rows that are subsets of another row (keeping one of equal rows)."""
    n = len(masks)
    if n <= 1:
        return masks
    sizes = masks.sum(axis=1)
    order = np.argsort(-sizes, kind="stable")
    packed = np.packbits(masks[order], axis=1)
    kept: list[int] = []
    for i in range(n):
        row = packed[i]
        if kept:
            K = packed[kept]
            if ((row & ~K) == 0).all(axis=1).any():
                continue
        kept.append(i)
    return masks[np.sort(order[kept])]


def atoms(U: Cover, window: FiniteSubset, sft: SFT, margin: int = 2) -> Partition:
    """Nonempty Boolean atoms of U as unions of window patterns."""
    D = U.domain()
    if D and not D.issubset(window):
        raise WindowTooSmall("window must contain every cylinder shape of the cover")
    lang = sft.language(window, margin)
    w = restrict(U, lang)
    lab = w.atom_labels()
    elems = tuple(lang.symbolic(lab == a) for a in range(int(lab.max()) + 1 if len(lab) else 0))
    return Partition(elems)


def return_set(U: SymbolicSet, V: SymbolicSet, probe: FiniteSubset, sft: SFT, margin: int = 2) -> FiniteSubset:
    """{g in probe : U ∩ g^{-1}V is nonempty}."""
    out = []
    for g in probe:
        if _nonempty(_simplify(U.intersect(translate(V, g))), sft, margin):
            out.append(g)
    return FiniteSubset(frozenset(out), probe.d)


def product_sft(a: SFT, b: SFT) -> SFT:
    """X_a × X_b as an SFT over pair symbols "s|t" with the diagonal action."""
    _check_same_dims(a.d, b.d)
    syms = tuple(f"{s}|{t}" for s in a.alphabet for t in b.alphabet)
    forb = []
    for p in a.forbidden:
        for fill in itertools.product(b.alphabet.symbols, repeat=len(p.shape)):
            forb.append(Pattern(p.shape, tuple(f"{s}|{t}" for s, t in zip(p.values, fill))))
    for p in b.forbidden:
        for fill in itertools.product(a.alphabet.symbols, repeat=len(p.shape)):
            forb.append(Pattern(p.shape, tuple(f"{s}|{t}" for s, t in zip(fill, p.values))))
    return SFT(Alphabet(syms), a.d, tuple(forb), factors=(a, b), name=f"{a.name} × {b.name}")


def pair_pattern(p: Pattern, q: Pattern) -> Pattern:
    """The product-alphabet pattern of two patterns on the same shape."""
    if p.shape != q.shape:
        raise ValueError("patterns must share a shape")
    return Pattern(p.shape, tuple(f"{s}|{t}" for s, t in zip(p.values, q.values)))


def split_pattern(p: Pattern) -> tuple[Pattern, Pattern]:
    left = tuple(v.split("|", 1)[0] for v in p.values)
    right = tuple(v.split("|", 1)[1] for v in p.values)
    return Pattern(p.shape, left), Pattern(p.shape, right)


def load_json(path) -> object:
    with open(path) as fh:
        return json.load(fh)
