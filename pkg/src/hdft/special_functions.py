"""Euler and Rogers dilogarithms, their functional identities and log series.

All logarithms are principal.  ``li2`` rejects the cut ``(1, inf)`` and
``rogers_L`` additionally rejects the negative real axis; the endpoints 0
and 1 are admitted as limits.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from numbers import Number

__all__ = [
    "DomainError", "li2", "rogers_L", "rogers_L_real", "bloch_wigner",
    "check_reflection", "check_pentagon", "check_landen",
    "TruncatedLogSeries", "rogers_L_series", "binomial_series",
    "ZETA2",
]

ZETA2 = math.pi ** 2 / 6


class DomainError(ValueError):
    """Argument lies on an excluded branch cut or is not finite."""


def _bernoulli_even(count):
    # Akiyama-Tanigawa; returns B_0..B_{2*count} as Fractions
    n_max = 2 * count
    a = [Fraction(0)] * (n_max + 1)
    out = []
    for m in range(n_max + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        out.append(a[0])
    out[1] = -out[1]  # the recursion yields B_1 = +1/2
    return out


def _bernoulli_coeffs():
    b = _bernoulli_even(22)
    coeffs = []
    for k in range(1, 23):
        n = 2 * k
        coeffs.append(float(b[n] / math.factorial(n + 1)))
    return tuple(coeffs)


# Li2(z) = u - u^2/4 + sum_k B_2k u^(2k+1)/(2k+1)!,  u = -log(1-z)
_BERN = _bernoulli_coeffs()


def _as_complex(z):
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"non-finite argument {z!r}")
    return z


def _li2_series(z):
    total = 0j
    zn = z
    n = 1
    while True:
        term = zn / (n * n)
        total += term
        if abs(term) < 1e-18 * max(abs(total), 1e-300) or n > 200:
            return total
        n += 1
        zn *= z


def _li2_bernoulli(z):
    u = -cmath.log(1 - z)
    u2 = u * u
    total = u - u2 / 4
    p = u * u2
    for c in _BERN:
        term = c * p
        total += term
        if abs(term) < 1e-18 * abs(total):
            break
        p *= u2
    return total


def _li2(z):
    if z == 0:
        return 0j
    if z == 1:
        return complex(ZETA2)
    r = abs(z)
    if r <= 0.5:
        return _li2_series(z)
    if r > 1:
        return -ZETA2 - 0.5 * cmath.log(-z) ** 2 - _li2(1 / z)
    if z.real > 0.5:
        return ZETA2 - cmath.log(z) * cmath.log(1 - z) - _li2(1 - z)
    return _li2_bernoulli(z)


def li2(z) -> complex:
    """Euler's dilogarithm on the principal sheet."""
    z = _as_complex(z)
    if z.imag == 0 and z.real > 1:
        raise DomainError(f"li2: {z.real} lies on the cut (1, inf)")
    return _li2(z)


def _check_rogers_domain(z):
    if z.imag == 0 and (z.real < 0 or z.real > 1):
        raise DomainError(f"rogers_L: {z.real} lies on an excluded ray")


def rogers_L(z) -> complex:
    """Rogers dilogarithm ``Li2(z) + log(z) log(1 - z) / 2``."""
    z = _as_complex(z)
    _check_rogers_domain(z)
    if z == 0:
        return 0j
    if z == 1:
        return complex(ZETA2)
    return _li2(z) + 0.5 * cmath.log(z) * cmath.log(1 - z)


def rogers_L_real(x: float) -> float:
    """Real-analytic Rogers function on ``[0, inf)``.

    On ``(1, inf)`` this is the common real part of the two boundary values,
    ``2 L(1) - L(1/x)``, which is what the real-axis reflection identity uses.
    """
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise DomainError(f"rogers_L_real: {x} outside [0, inf)")
    if x <= 1:
        return rogers_L(x).real
    return 2 * ZETA2 - rogers_L(1 / x).real


def bloch_wigner(z) -> float:
    """``D(z) = Im Li2(z) + arg(1 - z) log|z|``, single valued on C minus {0, 1}."""
    z = _as_complex(z)
    if z == 0 or z == 1:
        return 0.0
    if z.imag == 0:
        return 0.0
    return li2(z).imag + cmath.phase(1 - z) * math.log(abs(z))


def _is_real_unit_interval(z):
    return z.imag == 0 and 0 < z.real < 1


def check_reflection(z) -> tuple[float, float]:
    """Residuals of ``L(z) + L(1-z) = L(1)`` and ``L(z) + L(1/z) = 2 L(1)``.

    On ``(0, 1)`` the second identity is taken for the real-analytic
    continuation.  Off the real axis the principal branches pick up the
    monodromy term ``sgn(Im z) (i pi / 2) log z``, which is subtracted.
    """
    z = _as_complex(z)
    one = complex(ZETA2)
    lz = rogers_L(z)
    res_a = abs(lz + rogers_L(1 - z) - one)
    if z.imag == 0:
        if not _is_real_unit_interval(z):
            raise DomainError(f"check_reflection: real {z.real} outside (0, 1)")
        res_b = abs(lz.real + rogers_L_real(1 / z.real) - 2 * ZETA2)
    else:
        jump = math.copysign(1.0, z.imag) * 0.5j * math.pi * cmath.log(z)
        res_b = abs(lz + rogers_L(1 / z) - 2 * one - jump)
    return res_a, res_b


def check_pentagon(x, y) -> float:
    """Residual of the five-term relation for the Rogers dilogarithm."""
    x = _as_complex(x)
    y = _as_complex(y)
    xy = x * y
    lhs = rogers_L(x) + rogers_L(y)
    rhs = (rogers_L(xy) + rogers_L((x - xy) / (1 - xy))
           + rogers_L((y - xy) / (1 - xy)))
    return abs(lhs - rhs)


def check_landen(z) -> float:
    """Residual of ``Li2(z) + Li2(1-z) = pi^2/6 - log z log(1-z)``."""
    z = _as_complex(z)
    return abs(li2(z) + li2(1 - z) - ZETA2 + cmath.log(z) * cmath.log(1 - z))


def _is_exact(v):
    return isinstance(v, (int, Fraction))


class TruncatedLogSeries:
    """``sum c[k, p] x^k l^p`` for ``k <= order`` and ``p <= max_log_power``.

    Coefficients are exact rationals (``Fraction``) or complex floats; mixing
    the two promotes to complex.  Products drop powers of ``x`` beyond the
    smaller order and add log powers.
    """

    __slots__ = ("order", "max_log_power", "_c")

    def __init__(self, order: int, max_log_power: int = 0, coeffs=None):
        if order < 0 or max_log_power < 0:
            raise ValueError("order and max_log_power must be non-negative")
        self.order = int(order)
        self.max_log_power = int(max_log_power)
        c = {}
        for (k, p), v in (coeffs or {}).items():
            if not (0 <= k <= self.order and 0 <= p <= self.max_log_power):
                if v != 0:
                    raise ValueError(f"coefficient ({k}, {p}) outside bounds")
                continue
            if isinstance(v, int):
                v = Fraction(v)
            if v != 0:
                c[(k, p)] = v
        self._c = c

    @classmethod
    def constant(cls, value, order):
        return cls(order, 0, {(0, 0): value})

    @classmethod
    def one(cls, order):
        return cls.constant(Fraction(1), order)

    @classmethod
    def zero(cls, order):
        return cls(order, 0)

    @property
    def coeffs(self):
        return dict(self._c)

    @property
    def exact(self):
        return all(_is_exact(v) for v in self._c.values())

    def coeff(self, k, p=0):
        return self._c.get((k, p), Fraction(0))

    def items(self):
        return sorted(self._c.items())

    def truncate(self, order):
        order = min(order, self.order)
        return TruncatedLogSeries(
            order, self.max_log_power,
            {kp: v for kp, v in self._c.items() if kp[0] <= order})

    def log_degree(self):
        return max((p for _, p in self._c), default=0)

    def at(self, x, ell=None):
        """Evaluate at a concrete ``x``; ``ell`` defaults to ``log x``."""
        if ell is None:
            ell = cmath.log(x) if self.log_degree() else 0
        total = 0
        for (k, p), v in self._c.items():
            total += complex(v) * x ** k * ell ** p
        return total

    def _coerce(self, other):
        if isinstance(other, TruncatedLogSeries):
            return other
        if isinstance(other, Number):
            return TruncatedLogSeries.constant(other, self.order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        order = min(self.order, other.order)
        c = {kp: v for kp, v in self._c.items() if kp[0] <= order}
        for kp, v in other._c.items():
            if kp[0] <= order:
                c[kp] = c.get(kp, 0) + v
        return TruncatedLogSeries(order, max(self.max_log_power, other.max_log_power), c)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedLogSeries(self.order, self.max_log_power,
                                  {kp: -v for kp, v in self._c.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return TruncatedLogSeries(self.order, self.max_log_power,
                                      {kp: v * other for kp, v in self._c.items()})
        if not isinstance(other, TruncatedLogSeries):
            return NotImplemented
        order = min(self.order, other.order)
        c = {}
        for (k1, p1), v1 in self._c.items():
            if k1 > order:
                continue
            for (k2, p2), v2 in other._c.items():
                k = k1 + k2
                if k > order:
                    continue
                kp = (k, p1 + p2)
                c[kp] = c.get(kp, 0) + v1 * v2
        return TruncatedLogSeries(order, self.max_log_power + other.max_log_power, c)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers")
        out = TruncatedLogSeries.one(self.order)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def exp(self):
        """``exp`` of a series without ``x^0`` terms."""
        if any(k == 0 for k, _ in self._c):
            raise ValueError("exp needs a series with vanishing x^0 part")
        K = self.order
        out = TruncatedLogSeries.one(K)
        term = TruncatedLogSeries.one(K)
        for n in range(1, K + 1):
            term = term * self * Fraction(1, n)
            if not term._c:
                break
            out = out + term
        return out

    def __eq__(self, other):
        if isinstance(other, Number):
            other = TruncatedLogSeries.constant(other, self.order)
        if not isinstance(other, TruncatedLogSeries):
            return NotImplemented
        return self.order == other.order and self._c == other._c

    def __hash__(self):
        return hash((self.order, frozenset(self._c.items())))

    def max_abs_diff(self, other):
        keys = set(self._c) | set(other._c)
        return max((abs(complex(self.coeff(*kp)) - complex(other.coeff(*kp)))
                    for kp in keys), default=0.0)

    def to_json(self):
        out = []
        for (k, p), v in self.items():
            if isinstance(v, Fraction):
                val = f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
            else:
                val = [complex(v).real, complex(v).imag]
            out.append({"k": k, "p": p, "c": val})
        return {"order": self.order, "max_log_power": self.max_log_power, "terms": out}

    def __repr__(self):
        if not self._c:
            return f"TruncatedLogSeries(order={self.order}, 0)"
        parts = []
        for (k, p), v in self.items():
            mon = "".join(s for s in (f"x^{k}" if k else "", f"l^{p}" if p else ""))
            parts.append(f"({v})" + ("*" + mon if mon else ""))
        return f"TruncatedLogSeries(order={self.order}, " + " + ".join(parts) + ")"


def rogers_L_series(order: int) -> TruncatedLogSeries:
    """``L(x) = sum x^k/k^2 - (l/2) sum x^k/k`` through ``x^order``."""
    if order < 0:
        raise ValueError("order must be non-negative")
    c = {}
    for k in range(1, order + 1):
        c[(k, 0)] = Fraction(1, k * k)
        c[(k, 1)] = Fraction(-1, 2 * k)
    return TruncatedLogSeries(order, 1, c)


def binomial_series(n: int, order: int) -> TruncatedLogSeries:
    """``(1 - x)^n`` for any integer ``n``."""
    c = {}
    coef = Fraction(1)
    for k in range(order + 1):
        c[(k, 0)] = coef
        coef = coef * (k - n) / (k + 1)
    return TruncatedLogSeries(order, 0, c)
