"""Invariant measures with closed-form cylinder masses.

Scalar queries (:func:`cylinder_mass`) are exact ``Fraction`` values when
every parameter is rational; vectorised queries over a whole window language
(:func:`masses`) return float64 arrays, which is what the entropy code sums.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .group import Element, FiniteSubset
from .subshift import Alphabet, Language, Pattern, SymbolicSet, WindowTooSmall, translate

Number = Fraction | float


class UnsupportedMeasure(ValueError):
    pass


def as_number(v) -> Number:
    """"p/q" strings, ints and Fractions become Fractions; floats stay floats."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v)
        except ValueError:
            return float(v)
    return float(v)


def _fmt(v: Number):
    return f"{v.numerator}/{v.denominator}" if isinstance(v, Fraction) else float(v)


def _exact(*vals) -> bool:
    return all(isinstance(v, Fraction) for v in vals)


def phi(t: float) -> float:
    """φ(t) = -t log t with φ(0) = 0 (natural log)."""
    return 0.0 if t <= 0 else -t * math.log(t)


class Measure:
    variant = "abstract"
    ergodic = False
    pinsker = None  # "trivial" | "full" | None (unknown)
    d = 1

    def cylinder_mass(self, p: Pattern) -> Number:
        raise NotImplementedError

    def masses(self, lang: Language) -> np.ndarray:
        raise NotImplementedError

    def entropy_rate(self) -> float | None:
        """h_μ of the whole system when a closed form is known."""
        return None

    @property
    def invariant(self) -> bool:
        return True

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(eq=False)
class Bernoulli(Measure):
    probs: dict
    d: int = 1
    variant = "bernoulli"
    ergodic = True
    pinsker = "trivial"

    def __post_init__(self):
        self.probs = {str(k): as_number(v) for k, v in self.probs.items()}
        if any(v < 0 for v in self.probs.values()):
            raise ValueError("probabilities must be nonnegative")
        total = sum(self.probs.values())
        if abs(float(total) - 1) > 1e-12 or (_exact(*self.probs.values()) and total != 1):
            raise ValueError(f"probabilities sum to {total}, not 1")

    @classmethod
    def uniform(cls, alphabet: Alphabet | Sequence, d: int = 1) -> Bernoulli:
        syms = list(alphabet)
        return cls({s: Fraction(1, len(syms)) for s in syms}, d)

    @classmethod
    def binary(cls, p, d: int = 1) -> Bernoulli:
        """P(0) = p, P(1) = 1 - p."""
        p = as_number(p)
        return cls({"0": p, "1": 1 - p}, d)

    def cylinder_mass(self, p: Pattern) -> Number:
        out: Number = Fraction(1)
        for v in p.values:
            out = out * self.probs.get(v, Fraction(0))
        return out

    def masses(self, lang: Language) -> np.ndarray:
        vec = np.array([float(self.probs.get(s, 0)) for s in lang.sft.alphabet], dtype=float)
        return np.prod(vec[lang.table], axis=1) if lang.table.shape[1] else np.ones(len(lang))

    def entropy_rate(self) -> float:
        return sum(phi(float(v)) for v in self.probs.values())

    def to_json(self) -> dict:
        return {"variant": "bernoulli", "d": self.d, "probs": {k: _fmt(v) for k, v in self.probs.items()}}


def _matpow_frac(P: list, n: int) -> list:
    k = len(P)
    R = [[Fraction(int(i == j)) for j in range(k)] for i in range(k)]
    B = P
    while n:
        if n & 1:
            R = [[sum(R[i][t] * B[t][j] for t in range(k)) for j in range(k)] for i in range(k)]
        B = [[sum(B[i][t] * B[t][j] for t in range(k)) for j in range(k)] for i in range(k)]
        n >>= 1
    return R


@dataclass(eq=False)
class Markov(Measure):
    """Stationary Markov chain on Z with transition matrix P (rows indexed by
    ``symbols``).  The stationary vector is computed when not supplied."""

    symbols: tuple
    P: list
    pi: list | None = None
    variant = "markov"
    pinsker = None

    def __post_init__(self):
        self.symbols = tuple(str(s) for s in self.symbols)
        k = len(self.symbols)
        self.P = [[as_number(v) for v in row] for row in self.P]
        if len(self.P) != k or any(len(r) != k for r in self.P):
            raise ValueError("transition matrix shape does not match the symbols")
        for row in self.P:
            s = sum(row)
            if any(v < 0 for v in row) or abs(float(s) - 1) > 1e-12:
                raise ValueError("rows of P must be probability vectors")
        if self.pi is None:
            self.pi = self._stationary()
        else:
            self.pi = [as_number(v) for v in self.pi]
        if len(self.pi) != k or any(v < 0 for v in self.pi) or abs(float(sum(self.pi)) - 1) > 1e-12:
            raise ValueError("pi must be a probability vector")
        for j in range(k):
            s = sum(self.pi[i] * self.P[i][j] for i in range(k))
            if abs(float(s - self.pi[j])) > 1e-12:
                raise ValueError("pi is not stationary for P")
        self.ergodic = self._irreducible()

    @property
    def exact(self) -> bool:
        return _exact(*itertools.chain(*self.P))

    def _stationary(self) -> list:
        k = len(self.symbols)
        if self.exact:
            import sympy

            M = sympy.Matrix(k, k, lambda i, j: sympy.Rational(self.P[j][i].numerator, self.P[j][i].denominator))
            ns = (M - sympy.eye(k)).nullspace()
            if len(ns) != 1:
                raise ValueError("stationary vector is not unique; pass pi explicitly")
            v = ns[0] / sum(ns[0])
            return [Fraction(int(x.p), int(x.q)) for x in v]
        A = np.array(self.P, dtype=float).T - np.eye(k)
        A = np.vstack([A, np.ones(k)])
        b = np.zeros(k + 1)
        b[-1] = 1
        v, *_ = np.linalg.lstsq(A, b, rcond=None)
        return [float(x) for x in v]

    def _irreducible(self) -> bool:
        A = (np.array(self.P, dtype=float) > 0).astype(int)
        k = len(A)
        R = np.linalg.matrix_power(A + np.eye(k, dtype=int), k) > 0
        return bool(R.all())

    @classmethod
    def golden_mean(cls, p) -> Markov:
        """P = [[1-p, p], [1, 0]] on the golden mean shift."""
        p = as_number(p)
        one = Fraction(1) if isinstance(p, Fraction) else 1.0
        return cls(("0", "1"), [[one - p, p], [one, one * 0]])

    @classmethod
    def parry_parameter(cls) -> float:
        return 1 / ((1 + math.sqrt(5)) / 2) ** 2

    def _index(self, v: str) -> int:
        try:
            return self.symbols.index(v)
        except ValueError:
            return -1

    def cylinder_mass(self, p: Pattern) -> Number:
        if p.d != 1:
            raise UnsupportedMeasure("Markov measures live on Z")
        if not p.shape:
            return Fraction(1)
        pos = [g[0] for g in p.shape]
        idx = [self._index(v) for v in p.values]
        if min(idx) < 0:
            return Fraction(0)
        out = self.pi[idx[0]]
        exact = self.exact and _exact(*self.pi)
        for (a, i), (b, j) in zip(zip(pos, idx), zip(pos[1:], idx[1:])):
            if exact:
                step = _matpow_frac(self.P, b - a)[i][j]
            else:
                step = float(np.linalg.matrix_power(np.array(self.P, dtype=float), b - a)[i, j])
            out = out * step
        return out

    def masses(self, lang: Language) -> np.ndarray:
        pos = [g[0] for g in lang.window]
        if not pos:
            return np.ones(len(lang))
        remap = np.array([self._index(s) for s in lang.sft.alphabet])
        T = remap[lang.table]
        bad = (T < 0).any(axis=1)
        T = np.where(T < 0, 0, T)
        P = np.array(self.P, dtype=float)
        out = np.array(self.pi, dtype=float)[T[:, 0]]
        for c in range(1, len(pos)):
            Pg = np.linalg.matrix_power(P, pos[c] - pos[c - 1])
            out = out * Pg[T[:, c - 1], T[:, c]]
        out[bad] = 0.0
        return out

    def entropy_rate(self) -> float:
        return sum(float(self.pi[i]) * phi(float(self.P[i][j])) for i in range(len(self.P)) for j in range(len(self.P)))

    def to_json(self) -> dict:
        return {
            "variant": "markov",
            "symbols": list(self.symbols),
            "P": [[_fmt(v) for v in row] for row in self.P],
            "pi": [_fmt(v) for v in self.pi],
        }


@dataclass(eq=False)
class Periodic(Measure):
    """Uniform measure on the orbit of the configuration x_h = tile[h mod periods].

    ``tile`` maps each point of the box prod [0, periods_i) to a symbol; in
    d = 1 a plain word may be given instead.
    """

    tile: dict
    periods: tuple
    variant = "periodic"
    ergodic = True
    pinsker = "full"

    def __post_init__(self):
        self.periods = tuple(int(p) for p in self.periods)
        self.d = len(self.periods)
        self.tile = {tuple(k): str(v) for k, v in self.tile.items()}
        box = set(itertools.product(*(range(p) for p in self.periods)))
        if set(self.tile) != box:
            raise ValueError("tile must assign every point of the period box")

    @classmethod
    def word(cls, w: str) -> Periodic:
        return cls({(i,): c for i, c in enumerate(w)}, (len(w),))

    @property
    def period(self) -> int:
        return math.prod(self.periods)

    def shifts(self):
        return itertools.product(*(range(p) for p in self.periods))

    def value(self, h: Element) -> str:
        return self.tile[tuple(x % p for x, p in zip(h, self.periods))]

    def orbit_point(self, j: Element, window: FiniteSubset) -> Pattern:
        """The shift j of the base configuration restricted to a window."""
        return Pattern(window, tuple(self.value(tuple(a + b for a, b in zip(h, j))) for h in window))

    def cylinder_mass(self, p: Pattern) -> Number:
        hits = sum(
            all(self.value(tuple(a + b for a, b in zip(h, j))) == v for h, v in p.items()) for j in self.shifts()
        )
        return Fraction(hits, self.period)

    def masses(self, lang: Language) -> np.ndarray:
        out = np.zeros(len(lang))
        for j in self.shifts():
            pt = self.orbit_point(j, lang.window)
            i = lang.index(pt)
            if i < 0:
                raise WindowTooSmall("orbit point missing from the window language")
            out[i] += 1.0 / self.period
        return out

    def entropy_rate(self) -> float:
        return 0.0

    def to_json(self) -> dict:
        return {
            "variant": "periodic",
            "periods": list(self.periods),
            "tile": [{"at": list(k), "symbol": v} for k, v in sorted(self.tile.items())],
        }


@dataclass(eq=False)
class Convex(Measure):
    weights: list
    components: list
    variant = "convex"
    pinsker = None

    def __post_init__(self):
        self.weights = [as_number(w) for w in self.weights]
        if len(self.weights) != len(self.components) or not self.components:
            raise ValueError("one weight per component")
        if any(w < 0 for w in self.weights) or abs(float(sum(self.weights)) - 1) > 1e-12:
            raise ValueError("weights must be a probability vector")
        self.d = self.components[0].d
        live = [c for w, c in zip(self.weights, self.components) if w > 0]
        self.ergodic = len(live) == 1 and live[0].ergodic

    def cylinder_mass(self, p: Pattern) -> Number:
        out: Number = Fraction(0)
        for w, c in zip(self.weights, self.components):
            if w:
                out = out + w * c.cylinder_mass(p)
        return out

    def masses(self, lang: Language) -> np.ndarray:
        out = np.zeros(len(lang))
        for w, c in zip(self.weights, self.components):
            if w:
                out += float(w) * c.masses(lang)
        return out

    def entropy_rate(self) -> float | None:
        rates = [c.entropy_rate() for c in self.components]
        if any(r is None for r in rates):
            return None
        return sum(float(w) * r for w, r in zip(self.weights, rates))

    @property
    def invariant(self) -> bool:
        return all(c.invariant for c in self.components)

    def to_json(self) -> dict:
        return {
            "variant": "convex",
            "weights": [_fmt(w) for w in self.weights],
            "components": [c.to_json() for c in self.components],
        }


def convex_combine(a, nu: Measure, eta: Measure) -> Measure:
    a = as_number(a)
    if not 0 <= a <= 1:
        raise ValueError("a must lie in [0, 1]")
    if a == 1:
        return nu
    if a == 0:
        return eta
    return Convex([a, 1 - a], [nu, eta])


@dataclass
class EmpiricalSpec:
    base_points: list
    averaging_set: FiniteSubset
    weights: list | None = None

    def __post_init__(self):
        if not self.base_points:
            raise ValueError("need at least one base point")
        master = self.base_points[0].shape
        if any(p.shape != master for p in self.base_points):
            raise ValueError("base points must share the master window")


@dataclass(eq=False)
class Empirical(Measure):
    """(1/|F|) Σ_{g in F} g ν with ν a weighted average of point masses.

    Points are patterns on a master window; (gx)_h = x_{h+g}, so the mass of
    [p] is the weight of pairs (x, g) with x_{h+g} = p_h on the shape of p.
    """

    spec: EmpiricalSpec
    variant = "empirical"
    ergodic = False
    pinsker = None

    def __post_init__(self):
        pts = self.spec.base_points
        w = self.spec.weights or [Fraction(1, len(pts))] * len(pts)
        self.weights = [as_number(v) for v in w]
        self.d = pts[0].d
        self.master = pts[0].shape
        self._dicts = [p.as_dict() for p in pts]

    @property
    def invariant(self) -> bool:
        return False

    def _check(self, shape: FiniteSubset):
        for g in self.spec.averaging_set:
            if not shape.translate(g).issubset(self.master):
                raise WindowTooSmall("cylinder shape escapes the master window")

    def cylinder_mass(self, p: Pattern) -> Number:
        self._check(p.shape)
        F = self.spec.averaging_set
        out: Number = Fraction(0)
        for w, x in zip(self.weights, self._dicts):
            hits = sum(all(x[tuple(a + b for a, b in zip(h, g))] == v for h, v in p.items()) for g in F)
            out = out + w * Fraction(hits, len(F))
        return out

    def masses(self, lang: Language) -> np.ndarray:
        self._check(lang.window)
        out = np.zeros(len(lang))
        F = self.spec.averaging_set
        for w, x in zip(self.weights, self._dicts):
            for g in F:
                pt = Pattern(lang.window, tuple(x[tuple(a + b for a, b in zip(h, g))] for h in lang.window))
                i = lang.index(pt)
                if i < 0:
                    raise WindowTooSmall("a shifted base point is not in the window language")
                out[i] += float(w) / len(F)
        return out

    def to_json(self) -> dict:
        return {
            "variant": "empirical",
            "averaging_set": self.spec.averaging_set.to_json(),
            "base_points": [p.to_json() for p in self.spec.base_points],
            "weights": [_fmt(w) for w in self.weights],
        }


def empirical_measure(spec: EmpiricalSpec) -> Empirical:
    return Empirical(spec)


def cylinder_mass(mu: Measure, p: Pattern) -> Number:
    return mu.cylinder_mass(p)


def masses(mu: Measure, lang: Language) -> np.ndarray:
    return mu.masses(lang)


def set_mass(mu: Measure, U: SymbolicSet, window: FiniteSubset, sft) -> float:
    """Mass of a cylinder union, summed over the window patterns inside it."""
    if U.shape() and not U.shape().issubset(window):
        raise WindowTooSmall("window must contain every cylinder shape")
    lang = sft.language(window)
    return float(mu.masses(lang)[lang.mask(U)].sum())


def invariance_defect(mu: Measure, U: SymbolicSet, g: Element, window: FiniteSubset, sft) -> float:
    """|μ(U) - μ(g^{-1}U)|, both evaluated on ``window``."""
    return abs(set_mass(mu, U, window, sft) - set_mass(mu, translate(U, g), window, sft))


def entropy_rate(mu: Measure) -> float | None:
    return mu.entropy_rate()


def measure_from_json(data) -> Measure:
    if isinstance(data, str):
        data = json.loads(data)
    v = data.get("variant")
    if v == "bernoulli":
        return Bernoulli(dict(data["probs"]), int(data.get("d", 1)))
    if v == "markov":
        return Markov(tuple(data["symbols"]), data["P"], data.get("pi"))
    if v == "periodic":
        if "word" in data:
            return Periodic.word(str(data["word"]))
        tile = {tuple(t["at"]): t["symbol"] for t in data["tile"]}
        return Periodic(tile, tuple(data["periods"]))
    if v == "convex":
        return Convex(list(data["weights"]), [measure_from_json(c) for c in data["components"]])
    if v == "empirical":
        pts = [Pattern.from_json(p) for p in data["base_points"]]
        F = FiniteSubset.of([tuple(g) for g in data["averaging_set"]], pts[0].d)
        return Empirical(EmpiricalSpec(pts, F, data.get("weights")))
    raise ValueError(f"unknown measure variant {v!r}")
