"""The graded mode algebra spanned by hbar, W^i, P_i, x^i_n and x*_{i,n}.

Brackets are exact rationals.  ``flux=False`` replaces the structure tensor
by zero, which leaves three copies of the Heisenberg oscillator algebra.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement
from typing import NamedTuple

__all__ = [
    "Generator", "LieElement", "Hbar", "W", "P", "X", "Xstar",
    "eps", "bracket", "bracket_generators", "jacobiator", "verify_jacobi",
    "grade", "generators_up_to", "JacobiReport",
]

KINDS = ("hbar", "W", "P", "X", "Xstar")
_RANK = {k: r for r, k in enumerate(KINDS)}


class Generator(NamedTuple):
    kind: str
    i: int = 0
    n: int = 0

    def sort_key(self):
        return (_RANK[self.kind], self.i, self.n)

    def __repr__(self):
        if self.kind == "hbar":
            return "hbar"
        if self.kind in ("W", "P"):
            return f"{self.kind}{self.i}"
        return f"{'x*' if self.kind == 'Xstar' else 'x'}[{self.i},{self.n}]"


def _dir(i):
    if i not in (1, 2, 3):
        raise ValueError(f"direction index {i} not in 1..3")
    return i


def Hbar():
    return Generator("hbar")


def W(i):
    return Generator("W", _dir(i))


def P(i):
    return Generator("P", _dir(i))


def X(i, n):
    return Generator("X", _dir(i), int(n))


def Xstar(i, n):
    return Generator("Xstar", _dir(i), int(n))


def eps(i, j, k):
    """Levi-Civita symbol with ``eps(1, 2, 3) = 1``."""
    if len({i, j, k}) < 3:
        return 0
    return 1 if (i, j, k) in ((1, 2, 3), (2, 3, 1), (3, 1, 2)) else -1


def _third(i, j):
    return 6 - i - j


def grade(g: Generator) -> int:
    if g.kind in ("X", "Xstar"):
        return g.n
    return 0


class LieElement:
    """Finite rational combination of generators."""

    __slots__ = ("_t",)

    def __init__(self, terms=None):
        t = {}
        if isinstance(terms, Generator):
            terms = {terms: 1}
        for g, v in (terms or {}).items():
            v = Fraction(v)
            if v:
                t[g] = t.get(g, 0) + v
        self._t = {g: v for g, v in t.items() if v}

    @property
    def terms(self):
        return dict(sorted(self._t.items(), key=lambda kv: kv[0].sort_key()))

    def items(self):
        return self.terms.items()

    def __bool__(self):
        return bool(self._t)

    def __iter__(self):
        return iter(self.terms.items())

    def __add__(self, other):
        other = as_element(other)
        t = dict(self._t)
        for g, v in other._t.items():
            t[g] = t.get(g, 0) + v
        return LieElement(t)

    def __neg__(self):
        return LieElement({g: -v for g, v in self._t.items()})

    def __sub__(self, other):
        return self + (-as_element(other))

    def __mul__(self, c):
        return LieElement({g: v * Fraction(c) for g, v in self._t.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, Generator):
            other = LieElement(other)
        if isinstance(other, int) and other == 0:
            return not self._t
        if not isinstance(other, LieElement):
            return NotImplemented
        return self._t == other._t

    def __hash__(self):
        return hash(frozenset(self._t.items()))

    def coeff(self, g):
        return self._t.get(g, Fraction(0))

    def __repr__(self):
        if not self._t:
            return "0"
        return " + ".join(f"({v})*{g!r}" for g, v in self.terms.items())


def as_element(x):
    if isinstance(x, LieElement):
        return x
    if isinstance(x, Generator):
        return LieElement(x)
    if x == 0:
        return LieElement()
    raise TypeError(f"cannot interpret {x!r} as a Lie element")


def _ordered(a, b, flux):
    """Bracket for the ordered pair if a rule is listed for it, else None."""
    ka, kb = a.kind, b.kind
    if ka == "Xstar" and kb == "X":
        if b.n != 0 and a.i == b.i and a.n == -b.n:
            return {Hbar(): Fraction(1, b.n)}
        return {}
    if ka == "P" and kb == "X":
        if b.n == 0 and a.i == b.i:
            return {Hbar(): Fraction(1)}
        return {}
    if ka == "W" and kb == "Xstar":
        if b.n == 0 and a.i == b.i:
            return {Hbar(): Fraction(1)}
        return {}
    if not flux:
        return None
    if ka == "P" and kb == "P":
        if a.i == b.i:
            return {}
        k = _third(a.i, b.i)
        return {W(k): Fraction(-eps(a.i, b.i, k))}
    if ka == "P" and kb == "Xstar":
        if a.i == b.i:
            return {}
        k = _third(a.i, b.i)
        return {X(k, b.n): Fraction(-eps(a.i, b.i, k), 2)}
    if ka == "Xstar" and kb == "Xstar":
        if a.i == b.i:
            return {}
        k = _third(a.i, b.i)
        e = eps(a.i, b.i, k)
        m, n = a.n, b.n
        if m == 0 and n == 0:
            return {}
        if n == 0:
            return {X(k, m): Fraction(e, 2 * m)}
        if m == 0:
            return None
        out = {}
        if m + n:
            out[X(k, m + n)] = Fraction(e * (m + n), 2 * m * n)
        else:
            out[W(k)] = Fraction(e, m * m)
        return out
    return None


def bracket_generators(a: Generator, b: Generator, flux: bool = True) -> LieElement:
    r = _ordered(a, b, flux)
    if r is not None:
        return LieElement(r)
    r = _ordered(b, a, flux)
    if r is not None:
        return -LieElement(r)
    return LieElement()


_CACHE = {}


def _gen_bracket_cached(a, b, flux):
    key = (a, b, flux)
    hit = _CACHE.get(key)
    if hit is None:
        hit = bracket_generators(a, b, flux)
        _CACHE[key] = hit
    return hit


def bracket(a, b, flux: bool = True) -> LieElement:
    """Bilinear bracket of two Lie elements (or generators)."""
    a = as_element(a)
    b = as_element(b)
    acc = {}
    for ga, va in a._t.items():
        for gb, vb in b._t.items():
            for g, v in _gen_bracket_cached(ga, gb, flux)._t.items():
                acc[g] = acc.get(g, 0) + va * vb * v
    return LieElement(acc)


def jacobiator(a, b, c, flux: bool = True) -> LieElement:
    return (bracket(a, bracket(b, c, flux), flux)
            + bracket(b, bracket(c, a, flux), flux)
            + bracket(c, bracket(a, b, flux), flux))


def generators_up_to(max_mode: int, kinds=KINDS):
    gens = []
    if "hbar" in kinds:
        gens.append(Hbar())
    for kind in ("W", "P"):
        if kind in kinds:
            gens.extend(Generator(kind, i) for i in (1, 2, 3))
    for kind in ("X", "Xstar"):
        if kind in kinds:
            gens.extend(Generator(kind, i, n)
                        for i in (1, 2, 3) for n in range(-max_mode, max_mode + 1))
    return gens


class JacobiReport(NamedTuple):
    max_mode: int
    checked: int
    failures: list

    @property
    def ok(self):
        return not self.failures


def verify_jacobi(max_mode: int, kinds=KINDS, flux: bool = True) -> JacobiReport:
    """Jacobiator of every unordered triple of generators with ``|mode| <= max_mode``."""
    if max_mode < 0:
        raise ValueError("max_mode must be non-negative")
    gens = generators_up_to(max_mode, kinds)
    failures = []
    checked = 0
    for a, b, c in combinations_with_replacement(gens, 3):
        checked += 1
        j = jacobiator(a, b, c, flux)
        if j:
            failures.append(((a, b, c), j))
    return JacobiReport(max_mode, checked, failures)
