"""Four- and five-point correlators of exponential vertex operators.

Closed forms are compared with the operator-algebra oracle of
:mod:`hdft.fock_oracle`.  Results keep the monomial prefactor
(integer powers of the insertion points) apart from the ratio part, which
for 4-point functions is a :class:`TruncatedLogSeries` in ``x = w/z`` with
``l = log x`` and for 5-point functions a complex number.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import comb
from typing import NamedTuple

from . import _engine
from .fock_oracle import (
    SYMBOLIC, FockState, GroundLabel, TruncationOverflow, as_label, kernel,
    numeric_ring, pair, pair_with_insertion, pairing, vertex_exp_plus,
    vertex_insertion, vertex_log_part, vertex_zero_mode,
)
from .special_functions import (
    ZETA2, TruncatedLogSeries, binomial_series, li2, rogers_L, rogers_L_series,
)

__all__ = [
    "epsilon_triple", "EpsilonTriple", "CorrelatorClosedForm", "ARGUMENTS",
    "four_point_closed", "four_point_oracle", "four_point_swapped",
    "four_point_swapped_closed", "four_point_value", "locality_check",
    "five_point_form", "five_point_closed", "five_point_raw",
    "five_point_vacuum_closed", "five_point_oracle", "FivePointOracleResult",
    "expansion_identity_check", "beta_sum_identity_check",
    "beta_sum_identity_sweep", "factorization_check", "SeriesIdentityReport",
    "oracle_prefactor", "admissible_grid",
]


def epsilon_triple(a, b, c) -> int:
    """Determinant of three integer 3-vectors."""
    a, b, c = (tuple(int(v) for v in x) for x in (a, b, c))
    return (a[0] * (b[1] * c[2] - b[2] * c[1])
            - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0]))


@dataclass(frozen=True)
class EpsilonTriple:
    value: int

    @classmethod
    def of(cls, a, b, c):
        return cls(epsilon_triple(_winding(a), _winding(b), _winding(c)))


def _winding(x):
    if isinstance(x, GroundLabel):
        return x.winding
    if len(x) == 2 and not isinstance(x[0], int):
        return tuple(x[0])
    return tuple(x)


def _eps(a, b, c, flux=True):
    if not flux:
        return 0
    return epsilon_triple(a.winding, b.winding, c.winding)


# ---------------------------------------------------------------- closed forms

ARGUMENTS = {
    "w/z": lambda z, w, t: w / z,
    "z/w": lambda z, w, t: z / w,
    "t/z": lambda z, w, t: t / z,
    "t/w": lambda z, w, t: t / w,
    "(w-t)/(z-t)": lambda z, w, t: (w - t) / (z - t),
    "(1/w-1/z)/(1/t-1/z)": lambda z, w, t: (1 / w - 1 / z) / (1 / t - 1 / z),
}


@dataclass(frozen=True)
class CorrelatorClosedForm:
    """``prod v^e * prod (a-b)^n * exp(sum c L(arg))`` with integer data.

    ``binomials`` entries are ``((a, b), n)`` standing for ``(a - b)^n``.
    The factor ordering follows the operator ordering, so for the swapped
    4-point function the binomial is ``(w - z)``.
    """

    prefactor: dict = field(default_factory=dict)
    binomials: tuple = ()
    dilogs: tuple = ()
    label_mismatch: bool = False

    def evaluate(self, z, w, t=0):
        if self.label_mismatch:
            return 0j
        pts = {"z": complex(z), "w": complex(w), "t": complex(t)}
        val = 1 + 0j
        for v, e in self.prefactor.items():
            if e:
                val *= pts[v] ** e
        for (a, b), n in self.binomials:
            if n:
                val *= (pts[a] - pts[b]) ** n
        return val * cmath.exp(self.exponent(z, w, t))

    def exponent(self, z, w, t=0):
        z, w, t = complex(z), complex(w), complex(t)
        return sum((c * rogers_L(ARGUMENTS[arg](z, w, t)) for c, arg in self.dilogs), 0j)

    def to_json(self):
        return {
            "prefactor": dict(self.prefactor),
            "binomials": [[list(p), n] for p, n in self.binomials],
            "dilogs": [[c, arg] for c, arg in self.dilogs],
            "label_mismatch": self.label_mismatch,
        }


def _ratio_series(n_binom, eps, order):
    s = binomial_series(n_binom, order)
    if eps:
        s = s * (rogers_L_series(order) * eps).exp()
    return s


def four_point_closed(delta, alpha, beta, gamma, order, flux=True):
    """Ratio series and closed form of ``<e^delta| e^alpha(z) e^beta(w) |e^gamma>``.

    The series is ``(1 - x)^{(a,b)} exp(eps L(x))`` in ``x = w/z``; the form
    carries the monomial exponents ``z^{(a,a)+(a,g)} w^{(b,b)+(b,g)}``.
    """
    delta, alpha, beta, gamma = map(as_label, (delta, alpha, beta, gamma))
    if delta != alpha + beta + gamma:
        return TruncatedLogSeries.zero(order), CorrelatorClosedForm(label_mismatch=True)
    ab = pairing(alpha, beta)
    e = _eps(alpha, beta, gamma, flux)
    form = CorrelatorClosedForm(
        prefactor={"z": pairing(alpha, alpha) + pairing(alpha, gamma),
                   "w": pairing(beta, beta) + pairing(beta, gamma)},
        binomials=((("z", "w"), ab),) if ab else (),
        dilogs=((e, "w/z"),) if e else (),
    )
    return _ratio_series(ab, e, order), form


def four_point_swapped_closed(delta, alpha, beta, gamma, order, flux=True):
    """Closed form for the order ``e^beta(w) e^alpha(z)``, as a series in ``y = z/w``."""
    delta, alpha, beta, gamma = map(as_label, (delta, alpha, beta, gamma))
    if delta != alpha + beta + gamma:
        return TruncatedLogSeries.zero(order), CorrelatorClosedForm(label_mismatch=True)
    ab = pairing(alpha, beta)
    e = _eps(alpha, beta, gamma, flux)
    form = CorrelatorClosedForm(
        prefactor={"z": pairing(alpha, alpha) + pairing(alpha, gamma),
                   "w": pairing(beta, beta) + pairing(beta, gamma)},
        binomials=((("w", "z"), ab),) if ab else (),
        dilogs=((-e, "z/w"),) if e else (),
    )
    return _ratio_series(ab, -e, order), form


def four_point_value(delta, alpha, beta, gamma, z, w, flux=True):
    """Numeric value of the closed-form 4-point function at ``(z, w)``."""
    _, form = four_point_closed(delta, alpha, beta, gamma, 0, flux)
    return form.evaluate(z, w)


# ---------------------------------------------------------------- 4-point oracle

_ENGINES = {}


def _engine_for(K, flux, use_compiled):
    key = (K, flux, use_compiled)
    eng = _ENGINES.get(key)
    if eng is None:
        eng = _ENGINES[key] = _engine.Engine(K, flux=flux, use_compiled=use_compiled)
    return eng


def oracle_prefactor(alpha, beta, gamma):
    """Exponents ``(z, w)`` stripped from the oracle output: ``(a, b+g)`` and ``(b, g)``."""
    alpha, beta, gamma = map(as_label, (alpha, beta, gamma))
    return {"z": pairing(alpha, beta + gamma), "w": pairing(beta, gamma)}


def _brute_2(alpha, beta, gamma, K, flux):
    st = FockState.ground(gamma, SYMBOLIC, K, flux)
    st = vertex_insertion(beta, st, "w", K)
    # the bra kills every creator, so exp(alpha_-) contributes nothing
    st = vertex_exp_plus(alpha, st, "z")
    st = vertex_log_part(alpha, st, "z")
    st = vertex_zero_mode(alpha, st)
    poly = pair(alpha + beta + gamma, st)
    pz = pairing(alpha, beta + gamma)
    pw = pairing(beta, gamma)
    out = {}
    for (ez, ew, et, lz, lw, lt), v in poly.items():
        n = ew - pw
        if ez + n != pz or et or lt:
            raise AssertionError("oracle output outside the two-point ansatz")
        if n <= K:
            out[(n, lz, lw)] = v
    return out


def _to_ratio_series(raw, order):
    """Rewrite ``sum c x^n l_outer^a l_inner^b`` as a series in ``l = l_inner - l_outer``."""
    q = {}
    for (n, a, b), v in raw.items():
        if a == 0 and n <= order:
            q[(n, b)] = Fraction(v)
    for (n, a, b), v in raw.items():
        if n > order:
            continue
        p = a + b
        want = q.get((n, p), 0) * comb(p, a) * (-1) ** a
        if want != v:
            raise ValueError("oracle output is not a function of the ratio log")
    maxp = max((p for _, p in q), default=0)
    return TruncatedLogSeries(order, maxp, q)


def _oracle_series(a, b, g, order, weight, method, flux, use_compiled):
    K = order if weight is None else weight
    if K < order:
        raise TruncationOverflow(f"order {order} needs truncation weight >= {order}, got {K}")
    if method == "brute":
        raw = _brute_2(a, b, g, K, flux)
    elif method == "engine":
        eng = _engine_for(K, flux, use_compiled)
        raw = eng.matrix_element((a.winding, a.momentum), (b.winding, b.momentum),
                                 (g.winding, g.momentum))
    else:
        raise ValueError(f"unknown oracle method {method!r}")
    return _to_ratio_series(raw, order)


def four_point_oracle(delta, alpha, beta, gamma, order, *, weight=None,
                      method="engine", flux=True, use_compiled=None):
    """Ratio series of ``<e^delta| e^alpha(z) e^beta(w) |e^gamma>`` from the operator algebra.

    The stripped prefactor is :func:`oracle_prefactor`.  ``method="brute"``
    runs the generic vertex operators of :mod:`hdft.fock_oracle`;
    ``"engine"`` the tabulated evaluator (compiled when available).
    """
    delta, alpha, beta, gamma = map(as_label, (delta, alpha, beta, gamma))
    if delta != alpha + beta + gamma:
        return TruncatedLogSeries.zero(order)
    return _oracle_series(alpha, beta, gamma, order, weight, method, flux, use_compiled)


def four_point_swapped(delta, alpha, beta, gamma, order, *, weight=None,
                       method="engine", flux=True, use_compiled=None):
    """Oracle series in ``y = z/w`` for the operator order ``e^beta(w) e^alpha(z)``."""
    delta, alpha, beta, gamma = map(as_label, (delta, alpha, beta, gamma))
    if delta != alpha + beta + gamma:
        return TruncatedLogSeries.zero(order)
    return _oracle_series(beta, alpha, gamma, order, weight, method, flux, use_compiled)


def locality_check(alpha, beta, gamma, ratio=2 + 1j):
    """Exchange relation of the two orderings at ``z/w = ratio``.

    With ``f = exp(eps L(x))``, ``x = w/z`` and the swapped ratio part
    ``g = exp(-eps L(1/x))``, the continued logs satisfy
    ``log f - log g = eps (2 L(1) + sgn(Im x) (i pi/2) log x)``.
    """
    alpha, beta, gamma = map(as_label, (alpha, beta, gamma))
    e = _eps(alpha, beta, gamma)
    y = complex(ratio)
    x = 1 / y
    if x.imag == 0:
        raise ValueError("locality check needs a ratio off the real axis")
    log_f = e * rogers_L(x)
    log_g = -e * rogers_L(y)
    jump = math.copysign(1.0, x.imag) * 0.5j * math.pi * cmath.log(x)
    expected = e * (2 * ZETA2 + jump)
    return {"epsilon": e, "ratio": y, "log_f": log_f, "log_g": log_g,
            "expected": expected, "residual": abs(log_f - log_g - expected)}


# ---------------------------------------------------------------- 5-point

def _five_labels(psi, alpha, beta, gamma, delta):
    labs = tuple(map(as_label, (psi, alpha, beta, gamma, delta)))
    for lab in labs:
        if not lab.is_pure_winding():
            raise ValueError("5-point closed forms are stated for pure windings")
    return labs


def five_point_form(psi, alpha, beta, gamma, delta, flux=True):
    psi, alpha, beta, gamma, delta = _five_labels(psi, alpha, beta, gamma, delta)
    if psi != alpha + beta + gamma + delta:
        return CorrelatorClosedForm(label_mismatch=True)
    terms = ((_eps(beta, gamma, delta, flux), "t/w"),
             (_eps(alpha, beta, delta, flux), "w/z"),
             (_eps(alpha, gamma, delta, flux), "t/z"),
             (_eps(alpha, beta, gamma, flux), "(w-t)/(z-t)"))
    return CorrelatorClosedForm(dilogs=tuple((c, a) for c, a in terms if c))


def five_point_closed(psi, alpha, beta, gamma, delta, z, w, t, flux=True):
    """``<psi| e^alpha(z) e^beta(w) e^gamma(t) |e^delta>`` for pure windings."""
    return five_point_form(psi, alpha, beta, gamma, delta, flux).evaluate(z, w, t)


def five_point_vacuum_closed(alpha, beta, gamma, z, w, t, flux=True):
    """Vacuum-bra 5-point function, ``delta = -(alpha+beta+gamma)``, in single-dilog form.

    The exponent is ``-eps(alpha,beta,gamma) L(V)``: the four-dilog form at
    this ``delta`` collapses to it through the five-term relation, and the
    operator oracle agrees with that sign.
    """
    alpha, beta, gamma = map(as_label, (alpha, beta, gamma))
    e = _eps(alpha, beta, gamma, flux)
    form = CorrelatorClosedForm(dilogs=((-e, "(1/w-1/z)/(1/t-1/z)"),) if e else ())
    return form.evaluate(z, w, t)


def five_point_raw(psi, alpha, beta, gamma, delta, z, w, t, flux=True):
    """Pre-pentagon exponent: four ``L`` terms plus the ``Li2``/log cross terms.

    The two double sums are replaced by their dilogarithm closed forms.
    """
    psi, alpha, beta, gamma, delta = _five_labels(psi, alpha, beta, gamma, delta)
    if psi != alpha + beta + gamma + delta:
        return 0j
    z, w, t = complex(z), complex(w), complex(t)
    e_bgd = _eps(beta, gamma, delta, flux)
    e_abg = _eps(alpha, beta, gamma, flux)
    e_abd = _eps(alpha, beta, delta, flux)
    e_agd = _eps(alpha, gamma, delta, flux)
    expo = (e_bgd * rogers_L(t / w) + (e_abg + e_abd) * rogers_L(w / z)
            + e_agd * rogers_L(t / z))
    if e_abg:
        cross = li2(t / z) + (cmath.log(w) - cmath.log(z)) * cmath.log(1 - t / z)
        s1 = li2((t - w) / (t - z)) - li2(t / (t - z)) - li2(w / z)
        # image of s1 under (z, w, t) -> (1/t, 1/w, 1/z)
        s2 = li2((1 / z - 1 / w) / (1 / z - 1 / t)) - li2(t / (t - z)) - li2(t / w)
        expo += e_abg * (-cross + s1 - s2) / 2
    return cmath.exp(expo)


class FivePointOracleResult(NamedTuple):
    value: complex
    bound: float
    weight: int
    overflow: bool = False
    underflow: bool = False

    def __complex__(self):
        return complex(self.value)


def five_point_oracle(psi, alpha, beta, gamma, delta, z, w, t, weight=16,
                      flux=True, cocycle=None):
    """Three raw vertex insertions on ``|e^delta>`` paired with ``<psi|``.

    Runs on the complex scalar ring at the given points.  ``bound`` is the
    truncation estimate ``C r^{K+1}`` with ``r`` the larger of ``|w/z|`` and
    ``|t/w|`` and ``C = 2 |value| / (1 - r)``.
    """
    psi, alpha, beta, gamma, delta = map(as_label, (psi, alpha, beta, gamma, delta))
    z, w, t = complex(z), complex(w), complex(t)
    if not abs(z) > abs(w) > abs(t) > 0:
        raise ValueError("five_point_oracle needs |z| > |w| > |t| > 0")
    r = max(abs(w / z), abs(t / w))
    if r > 0.5:
        raise ValueError(f"ratio {r:.3g} exceeds 1/2; truncation is not controlled")
    K = int(weight)
    if psi != alpha + beta + gamma + delta:
        return FivePointOracleResult(0j, 0.0, K)
    ring = numeric_ring(z, w, t)
    st = FockState.ground(delta, ring, K, flux)
    st = vertex_insertion(gamma, st, "t", K, cocycle)
    st = vertex_insertion(beta, st, "w", K, cocycle)
    val = complex(pair_with_insertion(psi, alpha, st, "z", cocycle))
    finite = cmath.isfinite(val)
    tiny = finite and val != 0 and abs(val) < 1e-300
    bound = 2 * abs(val) * r ** (K + 1) / (1 - r) if finite else math.inf
    kern = kernel(flux, False)
    kern._ins.clear()
    kern._ann.clear()
    return FivePointOracleResult(val, bound, K, not finite, tiny)


# ---------------------------------------------------------------- identities

class SeriesIdentityReport(NamedTuple):
    ok: bool
    checked: int
    mismatches: list

    def to_json(self):
        return {"ok": self.ok, "checked": self.checked,
                "mismatches": [[str(x) for x in m] for m in self.mismatches]}


def _bmul(a, b, N):
    out = {}
    for (i1, j1), v1 in a.items():
        for (i2, j2), v2 in b.items():
            if i1 + i2 + j1 + j2 <= N:
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, 0) + v1 * v2
    return {k: v for k, v in out.items() if v}


def _badd(a, b, c=1):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + c * v
    return {k: v for k, v in out.items() if v}


def _li2_of(series, N):
    """Taylor composition ``Li2(X)`` for a bivariate series ``X`` without constant term."""
    acc = {}
    power = {(0, 0): Fraction(1)}
    for k in range(1, N + 1):
        power = _bmul(power, series, N)
        if not power:
            break
        acc = _badd(acc, power, Fraction(1, k * k))
    return acc


def expansion_identity_check(order: int) -> SeriesIdentityReport:
    """Coefficients of ``Li2((t-w)/(t-z)) - Li2(t/(t-z)) - Li2(w/z)``.

    In ``u = w/z`` and ``v = t/z`` the monomial ``t^{n-m} z^{-n} w^m`` is
    ``u^m v^{n-m}``.  Each argument is expanded as a power series in
    ``(u, v)`` and composed with the Taylor series of ``Li2``; the result
    must be ``1/(nm)`` for ``1 <= m < n`` and zero elsewhere.
    """
    N = int(order)
    if N < 2:
        raise ValueError("order must be at least 2")
    geo = {(0, j): Fraction(1) for j in range(N + 1)}           # 1/(1-v)
    x1 = _bmul({(1, 0): Fraction(1), (0, 1): Fraction(-1)}, geo, N)  # (u-v)/(1-v)
    x2 = _bmul({(0, 1): Fraction(-1)}, geo, N)                  # -v/(1-v)
    x3 = {(1, 0): Fraction(1)}                                  # u
    lhs = _badd(_badd(_li2_of(x1, N), _li2_of(x2, N), -1), _li2_of(x3, N), -1)
    mismatches = []
    checked = 0
    for i in range(N + 1):
        for j in range(N + 1 - i):
            if i + j == 0:
                continue
            n, m = i + j, i
            want = Fraction(1, n * m) if 1 <= m < n else Fraction(0)
            got = lhs.get((i, j), Fraction(0))
            checked += 1
            if got != want:
                mismatches.append(((n, m), got, want))
    return SeriesIdentityReport(not mismatches, checked, mismatches)


def beta_sum_identity_check(j: int, k: int) -> SeriesIdentityReport:
    """``sum_n (-1)^n C(k,n)/(n+j) = 1/(j C(j+k,j))`` in exact rationals."""
    if j < 1 or k < 0:
        raise ValueError("need j >= 1 and k >= 0")
    lhs = sum(Fraction((-1) ** n * comb(k, n), n + j) for n in range(k + 1))
    rhs = Fraction(1, j * comb(j + k, j))
    bad = [] if lhs == rhs else [((j, k), lhs, rhs)]
    return SeriesIdentityReport(not bad, 1, bad)


def beta_sum_identity_sweep(max_total: int = 12) -> SeriesIdentityReport:
    checked = 0
    bad = []
    for j in range(1, max_total + 1):
        for k in range(0, max_total - j + 1):
            r = beta_sum_identity_check(j, k)
            checked += 1
            bad.extend(r.mismatches)
    return SeriesIdentityReport(not bad, checked, bad)


def factorization_check(psi, alpha, beta, gamma, delta, z, w, t, flux=True):
    """5-point closed form against the product of four 4-point closed forms.

    The factors are the 4-point functions with bras shifted by one label:
    ``(beta, gamma)`` at ``(w, t)`` on ``delta``, ``(alpha, beta)`` at
    ``(z, w)`` on ``delta``, ``(alpha, gamma)`` at ``(z, t)`` on ``delta`` and
    ``(alpha, beta)`` at ``(z - t, w - t)`` on ``gamma``.
    """
    psi, alpha, beta, gamma, delta = _five_labels(psi, alpha, beta, gamma, delta)
    z, w, t = complex(z), complex(w), complex(t)
    closed = five_point_closed(psi, alpha, beta, gamma, delta, z, w, t, flux)
    if psi != alpha + beta + gamma + delta:
        return {"closed": closed, "product": 0j, "factors": [], "residual": 0.0}
    factors = [
        four_point_value(beta + gamma + delta, beta, gamma, delta, w, t, flux),
        four_point_value(alpha + beta + delta, alpha, beta, delta, z, w, flux),
        four_point_value(alpha + gamma + delta, alpha, gamma, delta, z, t, flux),
        four_point_value(alpha + beta + gamma, alpha, beta, gamma, z - t, w - t, flux),
    ]
    prod_ = 1 + 0j
    for f in factors:
        prod_ *= f
    res = abs(closed - prod_) / abs(closed)
    return {"closed": closed, "product": prod_, "factors": factors, "residual": res}


def admissible_grid():
    """3x3x3 sample of ``|z| > |w| > |t| > 0`` with mixed real and complex points."""
    zs = (6.0, 7.0 + 1.5j, 9.0 - 2.0j)
    ws = (2.0, 2.5 - 0.8j, 1.5 + 1.2j)
    ts = (0.5, 0.3 + 0.4j, -0.2 + 0.6j)
    return list(product(zs, ws, ts))
