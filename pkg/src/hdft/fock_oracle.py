"""Induced representation on exponential ground states and raw vertex operators.

States are finite sums ``c * m|g>`` with ``m`` a PBW monomial of creators and
``g`` a :class:`GroundLabel`.  Coefficients live in a :class:`ScalarRing`.
The symbolic ring tracks integer powers of the insertion points ``z, w, t``
and of the log symbols ``l_z, l_w, l_t``; the numeric ring substitutes
principal values at concrete points.

Truncation is by total oscillator weight: creators that would push a
monomial beyond ``max_weight`` are dropped.
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

from . import mode_algebra as ma
from ._kernel_py import Kernel, code, decode, weight, _EPS

__all__ = [
    "GroundLabel", "label", "pairing", "scaling_weight", "zero_mode_shift",
    "cross", "ScalarRing", "RATIONAL", "SYMBOLIC", "numeric_ring", "Poly",
    "FockState", "UnsupportedOperator", "TruncationOverflow",
    "monomial", "monomial_factors", "apply_generator", "apply_Q",
    "field_plus", "vertex_exp_plus", "vertex_exp_minus", "vertex_log_part",
    "vertex_zero_mode", "vertex_insertion", "pair", "kernel",
    "realize_via_currents", "CurrentsReport", "CoherentBra",
    "pair_with_insertion",
]

VARS = ("z", "w", "t")


class UnsupportedOperator(ValueError):
    """Zero-mode multiplication operators have no action on ground labels here."""


class TruncationOverflow(RuntimeError):
    """A requested coefficient lies beyond the configured truncation weight."""


def cross(a, b):
    return (a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0])


class GroundLabel(NamedTuple):
    """Lattice label ``(winding, momentum)`` of the ground state ``e^alpha``."""

    winding: tuple = (0, 0, 0)
    momentum: tuple = (0, 0, 0)

    def __add__(self, other):
        return GroundLabel(tuple(a + b for a, b in zip(self.winding, other.winding)),
                           tuple(a + b for a, b in zip(self.momentum, other.momentum)))

    def __sub__(self, other):
        return GroundLabel(tuple(a - b for a, b in zip(self.winding, other.winding)),
                           tuple(a - b for a, b in zip(self.momentum, other.momentum)))

    def __neg__(self):
        return GroundLabel(tuple(-a for a in self.winding),
                           tuple(-a for a in self.momentum))

    def is_pure_winding(self):
        return not any(self.momentum)

    def __repr__(self):
        return f"GroundLabel(w={self.winding}, p={self.momentum})"


def label(winding=(0, 0, 0), momentum=(0, 0, 0)):
    w = tuple(int(v) for v in winding)
    p = tuple(int(v) for v in momentum)
    if len(w) != 3 or len(p) != 3:
        raise ValueError("labels are pairs of integer 3-vectors")
    return GroundLabel(w, p)


def as_label(x):
    if isinstance(x, GroundLabel):
        return x
    if len(x) == 2 and not isinstance(x[0], int):
        return label(*x)
    return label(x)


def pairing(a: GroundLabel, b: GroundLabel) -> int:
    """Tautological pairing ``w_a . p_b + p_a . w_b``."""
    return sum(a.winding[i] * b.momentum[i] + a.momentum[i] * b.winding[i]
               for i in range(3))


scaling_weight = pairing


def zero_mode_shift(alpha: GroundLabel, bra: GroundLabel) -> GroundLabel:
    """``<e^delta| e^{alpha_0} = <e^{delta - alpha}|``."""
    return bra - alpha


@lru_cache(maxsize=None)
def kernel(flux=True, exact=True):
    return Kernel(flux=flux, exact=exact)


# ---------------------------------------------------------------- scalars

class Poly:
    """Rational polynomial in ``z^+-1, w^+-1, t^+-1, l_z, l_w, l_t``.

    Keys are exponent 6-tuples ``(ez, ew, et, lz, lw, lt)``.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs=None):
        self._c = {k: Fraction(v) for k, v in (coeffs or {}).items() if v}

    @classmethod
    def const(cls, v):
        return cls({(0,) * 6: v})

    @classmethod
    def symbol(cls, name):
        idx = {"z": 0, "w": 1, "t": 2, "lz": 3, "lw": 4, "lt": 5}[name]
        e = [0] * 6
        e[idx] = 1
        return cls({tuple(e): 1})

    def items(self):
        return sorted(self._c.items())

    def __add__(self, other):
        other = _poly(other)
        c = dict(self._c)
        for k, v in other._c.items():
            c[k] = c.get(k, 0) + v
        return Poly(c)

    __radd__ = __add__

    def __neg__(self):
        return Poly({k: -v for k, v in self._c.items()})

    def __sub__(self, other):
        return self + (-_poly(other))

    def __mul__(self, other):
        other = _poly(other)
        c = {}
        for k1, v1 in self._c.items():
            for k2, v2 in other._c.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                c[k] = c.get(k, 0) + v1 * v2
        return Poly(c)

    __rmul__ = __mul__

    def __eq__(self, other):
        try:
            other = _poly(other)
        except TypeError:
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def __bool__(self):
        return bool(self._c)

    def __repr__(self):
        return f"Poly({dict(self.items())})"


def _poly(x):
    if isinstance(x, Poly):
        return x
    if isinstance(x, (int, Fraction)):
        return Poly.const(x)
    raise TypeError(f"cannot coerce {x!r} to Poly")


class ScalarRing:
    """Coefficient backend for :class:`FockState`.

    ``symbolic`` rings keep powers of the insertion points and logs as
    formal exponents; numeric rings multiply them in at ``points``.
    """

    def __init__(self, name, exact, symbolic, points=None):
        self.name = name
        self.exact = exact
        self.symbolic = symbolic
        self.points = dict(points or {})
        self.logs = {k: cmath.log(v) for k, v in self.points.items()}

    def from_rational(self, q):
        return Fraction(q) if self.exact else complex(Fraction(q))

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    @property
    def zero(self):
        return Poly() if self.symbolic else self.from_rational(0)

    @property
    def one(self):
        return Poly.const(1) if self.symbolic else self.from_rational(1)

    def symbol(self, name):
        if self.symbolic:
            return Poly.symbol(name)
        if name.startswith("l"):
            return self.logs[name[1:]]
        return self.points[name]

    def __repr__(self):
        return f"ScalarRing({self.name})"


RATIONAL = ScalarRing("rational", exact=True, symbolic=False)
SYMBOLIC = ScalarRing("symbolic", exact=True, symbolic=True)


def numeric_ring(z=None, w=None, t=None):
    pts = {k: complex(v) for k, v in (("z", z), ("w", w), ("t", t)) if v is not None}
    return ScalarRing("complex", exact=False, symbolic=False, points=pts)


_NOEXP = (0, 0, 0, 0, 0, 0)


# ---------------------------------------------------------------- states

def monomial(*gens):
    """PBW monomial from creation generators (``X(i,-n)`` or ``Xstar(i,-n)``)."""
    mono = ()
    for g in gens:
        if g.kind not in ("X", "Xstar") or g.n >= 0:
            raise ValueError(f"{g!r} is not a creation generator")
        c = code(1 if g.kind == "Xstar" else 0, g.i, -g.n)
        mono = tuple(sorted(mono + (c,)))
    return mono


def monomial_factors(mono):
    out = []
    for c in mono:
        kind, i, n = decode(c)
        out.append(ma.Xstar(i, -n) if kind else ma.X(i, -n))
    return out


class FockState:
    """Immutable finite combination of ``coef * mono|label>``.

    Internally the symbolic ring's monomials in the insertion points are
    flattened into the key, so ``_t`` maps ``(mono, label, exps)`` to a
    base scalar (Fraction or complex).
    """

    __slots__ = ("ring", "max_weight", "flux", "_t")

    def __init__(self, ring=RATIONAL, max_weight=None, flux=True, terms=None):
        self.ring = ring
        self.max_weight = max_weight
        self.flux = flux
        self._t = {}
        if terms:
            for key, v in terms.items():
                if v:
                    self._t[key] = v

    @classmethod
    def ground(cls, lab, ring=RATIONAL, max_weight=None, flux=True):
        return cls.from_terms([((), as_label(lab), 1)], ring, max_weight, flux)

    @classmethod
    def from_terms(cls, terms, ring=RATIONAL, max_weight=None, flux=True):
        """Build from ``(mono, label, coef)`` with ``coef`` rational, complex or Poly."""
        st = cls(ring, max_weight, flux)
        for mono, lab, coef in terms:
            mono = tuple(sorted(mono))
            if max_weight is not None and weight(mono) > max_weight:
                continue
            lab = as_label(lab)
            if isinstance(coef, Poly):
                if not ring.symbolic:
                    raise TypeError("Poly coefficient needs a symbolic ring")
                for e, v in coef._c.items():
                    _acc(st._t, (mono, lab, e), v)
            else:
                e = _NOEXP if ring.symbolic else ()
                _acc(st._t, (mono, lab, e), ring.from_rational(coef)
                     if isinstance(coef, (int, Fraction)) else coef)
        return st

    def _new(self, terms):
        st = FockState(self.ring, self.max_weight, self.flux)
        st._t = {k: v for k, v in terms.items() if v}
        return st

    @property
    def kernel(self):
        return kernel(self.flux, self.ring.exact)

    def items(self):
        """Yield ``(mono, label, coef)`` with coefficients collected per basis vector."""
        grouped = {}
        for (mono, lab, e), v in self._t.items():
            grouped.setdefault((mono, lab), []).append((e, v))
        for (mono, lab), lst in sorted(grouped.items()):
            if self.ring.symbolic:
                yield mono, lab, Poly(dict(lst))
            else:
                yield mono, lab, sum(v for _, v in lst)

    def coefficient(self, mono, lab):
        lab = as_label(lab)
        for m, l_, c in self.items():
            if m == tuple(sorted(mono)) and l_ == lab:
                return c
        return self.ring.zero

    def raw_items(self):
        return self._t.items()

    def __len__(self):
        return len(self._t)

    def __bool__(self):
        return bool(self._t)

    def weight(self):
        return max((weight(m) for (m, _, _) in self._t), default=0)

    def __add__(self, other):
        t = dict(self._t)
        for k, v in other._t.items():
            _acc(t, k, v)
        return self._new(t)

    def __neg__(self):
        return self._new({k: -v for k, v in self._t.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = self.ring.from_rational(c) if isinstance(c, (int, Fraction)) else c
        return self._new({k: v * c for k, v in self._t.items()})

    def __eq__(self, other):
        if not isinstance(other, FockState):
            return NotImplemented
        return self._t == other._t

    def __hash__(self):
        return hash(frozenset(self._t.items()))

    def __repr__(self):
        body = " + ".join(f"({c})*{monomial_factors(m)}|{l!r}>" for m, l, c in self.items())
        return f"FockState({body or '0'})"


def _acc(d, k, v):
    nv = d.get(k, 0) + v
    if nv:
        d[k] = nv
    else:
        d.pop(k, None)


def _shift_exps(ring, e, v, var, zpow, lpow):
    """Multiply a flat term by ``var^zpow * l_var^lpow``."""
    if ring.symbolic:
        e = list(e)
        e[var] += zpow
        e[3 + var] += lpow
        return tuple(e), v
    name = VARS[var]
    if name not in ring.points:
        raise ValueError(f"{ring!r} has no value for {name}; use SYMBOLIC or numeric_ring")
    f = 1
    if zpow:
        f = ring.points[name] ** zpow
    if lpow:
        f = f * ring.logs[name] ** lpow
    return e, v * f


# ---------------------------------------------------------------- generators

def _gen_to_code(g):
    return code(1 if g.kind == "Xstar" else 0, g.i, abs(g.n))


def apply_generator(g, s: FockState) -> FockState:
    """Action of a generator (or Lie element) of the mode algebra on a state."""
    if isinstance(g, ma.LieElement):
        out = FockState(s.ring, s.max_weight, s.flux)
        for gen, c in g.items():
            out = out + apply_generator(gen, s).scale(c)
        return out
    kern = s.kernel
    out = {}
    if g.kind == "hbar":
        return s
    if g.kind == "W":
        for (mono, lab, e), v in s._t.items():
            x = lab.winding[g.i - 1]
            if x:
                _acc(out, (mono, lab, e), v * x)
        return s._new(out)
    if g.kind == "P":
        # P_i = Q_i + 1/2 eps_ijk x^j_0 W^k; the second piece needs x_0
        for (mono, lab, e), v in s._t.items():
            if s.flux and any(lab.winding[k - 1] for k in (1, 2, 3) if k != g.i):
                raise UnsupportedOperator(
                    "P_i on this label involves the zero mode x_0; use apply_Q")
        return apply_Q(g.i, s)
    if g.n == 0:
        raise UnsupportedOperator(f"{g!r} acts by multiplication on ground labels")
    c = _gen_to_code(g)
    K = s.max_weight
    if g.n < 0:
        for (mono, lab, e), v in s._t.items():
            if K is not None and weight(mono) + (-g.n) > K:
                continue
            for m, cf in kern.insert(c, mono):
                _acc(out, (m, lab, e), v * cf)
        return s._new(out)
    for (mono, lab, e), v in s._t.items():
        w = lab.winding
        for m, c0, c1, c2, c3 in kern.annihilate(c, mono):
            cf = c0 + c1 * w[0] + c2 * w[1] + c3 * w[2]
            if cf:
                _acc(out, (m, lab, e), v * cf)
    return s._new(out)


def apply_Q(i: int, s: FockState) -> FockState:
    """``Q_i = P_i - 1/2 eps_ijk x^j_0 W^k``; on ground labels it reads off ``p_i``."""
    kern = s.kernel
    out = {}
    for (mono, lab, e), v in s._t.items():
        p = lab.momentum[i - 1]
        if p:
            _acc(out, (mono, lab, e), v * p)
        for m, cf in kern.qderiv(i, mono):
            _acc(out, (m, lab, e), v * cf)
    return s._new(out)


def pair(bra, s: FockState):
    """``<bra|s>``: the coefficient of the oscillator-free term with that label."""
    bra = as_label(bra)
    if s.ring.symbolic:
        acc = {}
        for (mono, lab, e), v in s._t.items():
            if not mono and lab == bra:
                _acc(acc, e, v)
        return Poly(acc)
    total = s.ring.zero
    for (mono, lab, e), v in s._t.items():
        if not mono and lab == bra:
            total += v
    return total


# ---------------------------------------------------------------- vertex operators

def _mode_terms(alpha, g, flux=True):
    """Coefficients of alpha's modes acting on label g.

    Yields ``(kind, k, coef, logpow)``: ``w_k x*_k``, ``p_k x^k`` and, with
    flux, the log-dressed ``(l/2)(w x g)_k x^k`` part.
    """
    w, p = alpha.winding, alpha.momentum
    lc = cross(w, g.winding) if flux else (0, 0, 0)
    out = []
    for k in (1, 2, 3):
        if w[k - 1]:
            out.append((1, k, Fraction(w[k - 1]), 0))
        if p[k - 1]:
            out.append((0, k, Fraction(p[k - 1]), 0))
        if lc[k - 1]:
            out.append((0, k, Fraction(lc[k - 1], 2), 1))
    return out


def _coef(ring, q):
    return q if ring.exact else complex(q)


def _apply_field_plus(alpha, s, var, kern, ring, flux=True, only_n=None):
    """One application of ``alpha(var)_+`` (annihilation part) on flat terms."""
    nxt = {}
    for (mono, lab, e), v in s.items():
        wt = weight(mono)
        gw = lab.winding
        terms = _mode_terms(alpha, lab, flux)
        for n in range(1, wt + 1):
            if only_n is not None and n != only_n:
                continue
            for kind, k, cf, lp in terms:
                anns = kern.annihilate(code(kind, k, n), mono)
                if not anns:
                    continue
                e2, v2 = _shift_exps(ring, e, v * _coef(ring, cf), var, -n, lp)
                for m, c0, c1, c2, c3 in anns:
                    sc = c0 + c1 * gw[0] + c2 * gw[1] + c3 * gw[2]
                    if sc:
                        _acc(nxt, (m, lab, e2), v2 * sc)
    return nxt


def field_plus(alpha, s: FockState, var="z"):
    """``alpha(var)_+ s`` split by powers: ``{(n, p): FockState}`` for ``var^-n l^p``."""
    alpha = as_label(alpha)
    out = {}
    kern = s.kernel
    for (mono, lab, e), v in s._t.items():
        wt = weight(mono)
        for n in range(1, wt + 1):
            for kind, k, cf, lp in _mode_terms(alpha, lab, s.flux):
                for m, c0, c1, c2, c3 in kern.annihilate(code(kind, k, n), mono):
                    gw = lab.winding
                    sc = c0 + c1 * gw[0] + c2 * gw[1] + c3 * gw[2]
                    if sc:
                        d = out.setdefault((n, lp), {})
                        _acc(d, (m, lab, e), v * _coef(s.ring, cf) * sc)
    return {key: s._new(d) for key, d in sorted(out.items())}


def _var_index(var):
    return VARS.index(var) if isinstance(var, str) else int(var)


def vertex_exp_plus(alpha, s: FockState, var="z") -> FockState:
    """``exp(alpha(var)_+) s``; finite since every step lowers the weight."""
    alpha = as_label(alpha)
    vi = _var_index(var)
    kern = s.kernel
    ring = s.ring
    out = dict(s._t)
    cur = s._t
    r = 0
    while cur:
        r += 1
        nxt = _apply_field_plus(alpha, cur, vi, kern, ring, s.flux)
        inv = _coef(ring, Fraction(1, r))
        cur = {k: v * inv for k, v in nxt.items()}
        for k, v in cur.items():
            _acc(out, k, v)
    return s._new(out)


def vertex_exp_minus(alpha, s: FockState, var="w", max_weight=None) -> FockState:
    """``exp(alpha(var)_-) s`` truncated at total oscillator weight ``max_weight``."""
    alpha = as_label(alpha)
    vi = _var_index(var)
    K = s.max_weight if max_weight is None else max_weight
    if K is None:
        raise TruncationOverflow("vertex_exp_minus needs a truncation weight")
    kern = s.kernel
    ring = s.ring
    out = dict(s._t)
    cur = s._t
    r = 0
    while cur:
        r += 1
        nxt = {}
        inv = Fraction(1, r)
        for (mono, lab, e), v in cur.items():
            wt = weight(mono)
            terms = _mode_terms(alpha, lab, s.flux)
            for n in range(1, K - wt + 1):
                for kind, k, cf, lp in terms:
                    e2, v2 = _shift_exps(ring, e, v * _coef(ring, cf * inv), vi, n, lp)
                    for m, c in kern.insert(code(kind, k, n), mono):
                        _acc(nxt, (m, lab, e2), v2 * c)
        cur = nxt
        for k, v in cur.items():
            _acc(out, k, v)
    return s._new(out)


def vertex_log_part(alpha, s: FockState, var="z") -> FockState:
    """``var^{alpha_l}`` with ``alpha_l = w.Q + p.W``.

    On ``m|g>`` this is ``var^{(alpha, g)}`` times ``exp(l N)`` where ``N``
    acts by ``sum_i w_i [Q_i, .]`` on the monomial.
    """
    alpha = as_label(alpha)
    vi = _var_index(var)
    kern = s.kernel
    ring = s.ring
    w = alpha.winding
    cur = {}
    for (mono, lab, e), v in s._t.items():
        e2, v2 = _shift_exps(ring, e, v, vi, pairing(alpha, lab), 0)
        _acc(cur, (mono, lab, e2), v2)
    out = dict(cur)
    r = 0
    while cur:
        r += 1
        nxt = {}
        for (mono, lab, e), v in cur.items():
            e2, v2 = _shift_exps(ring, e, v * _coef(ring, Fraction(1, r)), vi, 0, 1)
            for i in (1, 2, 3):
                if not w[i - 1]:
                    continue
                for m, c in kern.qderiv(i, mono):
                    _acc(nxt, (m, lab, e2), v2 * c * w[i - 1])
        cur = nxt
        for k, v in cur.items():
            _acc(out, k, v)
    return s._new(out)


def vertex_zero_mode(alpha, s: FockState, cocycle=None) -> FockState:
    """``e^{alpha_0}``: shifts the label and conjugates the creators.

    ``cocycle(alpha, label)`` may return a scalar sign; the default is trivial.
    """
    alpha = as_label(alpha)
    kern = s.kernel
    out = {}
    for (mono, lab, e), v in s._t.items():
        nl = lab + alpha
        if cocycle is not None:
            v = v * cocycle(alpha, lab)
        for m, c in kern.shift(alpha.winding, mono):
            _acc(out, (m, nl, e), v * c)
    return s._new(out)


def vertex_insertion(alpha, s: FockState, var="z", max_weight=None, cocycle=None):
    """``e^alpha(var) = e^{alpha_0} var^{alpha_l} exp(alpha_-) exp(alpha_+)``."""
    s = vertex_exp_plus(alpha, s, var)
    s = vertex_exp_minus(alpha, s, var, max_weight)
    s = vertex_log_part(alpha, s, var)
    return vertex_zero_mode(alpha, s, cocycle)


class CoherentBra:
    """``Phi(m) = <g| exp(alpha(var)_+) m |g>`` for PBW monomials ``m``.

    The value is a polynomial in ``l_var`` (list of coefficients) times the
    implicit factor ``var^{-wt(m)}``.  It is computed by moving
    ``exp(alpha_+)`` through the first creator of ``m``: an ``x`` creator
    contributes a scalar, an ``x*`` creator contributes a scalar plus
    ``x`` annihilators acting on the remaining monomial.
    """

    def __init__(self, alpha, g, kern, max_weight):
        from ._engine import phi_scalars
        alpha = as_label(alpha)
        self.kern = kern
        self.w = alpha.winding
        conv = (lambda q: q) if kern.exact else float
        S, A = phi_scalars(max_weight, alpha.winding, alpha.momentum,
                           as_label(g).winding, kern.flux)
        self.S = {key: (conv(a), conv(b)) for key, (a, b) in S.items()}
        self.A = {key: tuple((k, d, conv(c)) for k, d, c in v) for key, v in A.items()}
        self.K = max_weight
        self.memo = {(): (kern.num(1),)}

    def __call__(self, mono):
        hit = self.memo.get(mono)
        if hit is not None:
            return hit
        if weight(mono) > self.K:
            raise TruncationOverflow("monomial heavier than the functional's table")
        kind, j, m = decode(mono[0])
        rest = mono[1:]
        base = self(rest)
        if kind == 0:
            f = self.kern.num(-self.w[j - 1], m)
            res = [v * f for v in base]
        else:
            s0, s1 = self.S[(j, m)]
            res = [0] * (len(base) + 1)
            for a, v in enumerate(base):
                res[a] += v * s0
                res[a + 1] += v * s1
            wr = weight(rest)
            for k, d, coef in self.A[(j, m)]:
                if d > wr:
                    continue
                for m2, c0, _, _, _ in self.kern.annihilate(code(0, k, d), rest):
                    f = coef * c0
                    sub = self(m2)
                    if len(sub) > len(res):
                        res.extend([0] * (len(sub) - len(res)))
                    for a, v in enumerate(sub):
                        res[a] += v * f
        while len(res) > 1 and not res[-1]:
            res.pop()
        out = tuple(res)
        self.memo[mono] = out
        return out


def pair_with_insertion(bra, alpha, s: FockState, var="z", cocycle=None):
    """``<bra| e^alpha(var) s`` with the last insertion folded into the bra."""
    bra = as_label(bra)
    alpha = as_label(alpha)
    vi = _var_index(var)
    ring = s.ring
    kern = s.kernel
    K = max(s.weight(), 1)
    bras = {}
    acc = {} if ring.symbolic else None
    total = ring.zero
    for (mono, lab, e), v in s._t.items():
        if lab + alpha != bra:
            continue
        cb = bras.get(lab)
        if cb is None:
            cb = bras[lab] = CoherentBra(alpha, lab, kern, K)
        poly = cb(mono)
        if cocycle is not None:
            v = v * cocycle(alpha, lab)
        zp = pairing(alpha, lab) - weight(mono)
        for a, c in enumerate(poly):
            if not c:
                continue
            e2, v2 = _shift_exps(ring, e, v * c, vi, zp, a)
            if acc is not None:
                _acc(acc, e2, v2)
            else:
                total += v2
    if acc is not None:
        return Poly(acc)
    return total


# ---------------------------------------------------------------- currents

class CurrentsReport(NamedTuple):
    max_mode: int
    checked: int
    failures: list

    @property
    def ok(self):
        return not self.failures


def _cur_add(d, k, v):
    nv = d.get(k, 0) + v
    if nv:
        d[k] = nv
    else:
        d.pop(k, None)


def _cur_mul(a, b):
    out = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            _cur_add(out, tuple(sorted(ka + kb)), va * vb)
    return out


def _cur_lin(*pairs):
    out = {}
    for d, c in pairs:
        for k, v in d.items():
            _cur_add(out, k, v * c)
    return out


def _beta_on_symbol(b, sym):
    _, i, m = b
    if sym[0] == "a":
        return m if (sym[1] == i and sym[2] == -m) else 0
    if sym[0] == "x0":
        return 1 if (sym[1] == i and m == 0) else 0
    raise ValueError("beta-beta handled separately")


def _cur_bracket(A, B, flux):
    """Bracket of elements linear in beta plus polynomials in alpha and x_0."""
    out = {}
    for ka, va in A.items():
        for kb, vb in B.items():
            a_is_b = len(ka) == 1 and ka[0][0] == "b"
            b_is_b = len(kb) == 1 and kb[0][0] == "b"
            if a_is_b and b_is_b:
                if not flux:
                    continue
                (_, i, m), (_, j, n) = ka[0], kb[0]
                if i == j:
                    continue
                k = 6 - i - j
                _cur_add(out, (("a", k, m + n),), va * vb * ma.eps(i, j, k))
            elif a_is_b or b_is_b:
                bsym, poly, sign = (ka[0], kb, 1) if a_is_b else (kb[0], ka, -1)
                for pos, sym in enumerate(poly):
                    c = _beta_on_symbol(bsym, sym)
                    if c:
                        _cur_add(out, poly[:pos] + poly[pos + 1:], sign * va * vb * c)
    return out


def _cur_image(g, M, flux):
    """Expression of a mode-algebra generator through the currents."""
    if g.kind == "hbar":
        return {(): Fraction(1)}
    if g.kind == "W":
        return {(("a", g.i, 0),): Fraction(1)}
    if g.kind == "X":
        if g.n == 0:
            return {(("x0", g.i),): Fraction(1)}
        return {(("a", g.i, g.n),): Fraction(-1, g.n)}
    i = g.i
    n = g.n if g.kind == "Xstar" else 0
    if g.kind == "Xstar" and n == 0:
        raise UnsupportedOperator("x*_{i,0} has no current expression")
    e = {(("b", i, n),): Fraction(1)}
    if flux:
        for j in (1, 2, 3):
            if j == i:
                continue
            k = 6 - i - j
            s = ma.eps(i, j, k)
            e = _cur_lin((e, 1), (_cur_mul(_cur_image(ma.X(j, n), M, flux),
                                            _cur_image(ma.W(k), M, flux)), s))
            for m in range(-M, M + 1):
                if m == 0:
                    continue
                q = _cur_mul(_cur_image(ma.X(j, n - m), M, flux),
                             _cur_image(ma.X(k, m), M, flux))
                e = _cur_lin((e, 1), (q, Fraction(-s * m, 2)))
    if g.kind == "P":
        return e
    return _cur_lin((e, Fraction(-1, n)))


def realize_via_currents(max_mode: int, flux: bool = True) -> CurrentsReport:
    """Check that current expressions of the generators reproduce the brackets.

    The identity is checked in the enveloping algebra of the currents, with
    the infinite quadratic sums cut at ``|m| <= 2 * max_mode + 2``; every
    bracket between generators of mode at most ``max_mode`` only sees
    indices inside that window.
    """
    if max_mode < 1:
        raise ValueError("max_mode must be at least 1")
    M = 2 * max_mode + 2
    gens = [ma.Hbar()]
    gens += [ma.W(i) for i in (1, 2, 3)] + [ma.P(i) for i in (1, 2, 3)]
    gens += [ma.X(i, n) for i in (1, 2, 3) for n in range(-max_mode, max_mode + 1)]
    gens += [ma.Xstar(i, n) for i in (1, 2, 3)
             for n in range(-max_mode, max_mode + 1) if n]
    images = {g: _cur_image(g, M, flux) for g in gens}
    failures = []
    checked = 0
    for ia, a in enumerate(gens):
        for b in gens[ia:]:
            checked += 1
            lhs = _cur_bracket(images[a], images[b], flux)
            rhs = {}
            for g, c in ma.bracket(a, b, flux).items():
                img = images.get(g) or _cur_image(g, M, flux)
                rhs = _cur_lin((rhs, 1), (img, c))
            if lhs != rhs:
                failures.append((a, b))
    return CurrentsReport(max_mode, checked, failures)
