"""Tetrahedron volumes on both sides of the correlator phase formula.

Points of the Riemann sphere are complex numbers or :data:`INF`.  The vertex
convention is fixed by ``cross_ratio(INF, 0, z, w) = w/z``.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from typing import NamedTuple

from .correlators import epsilon_triple, five_point_form, four_point_closed
from .fock_oracle import as_label, label
from .special_functions import bloch_wigner, rogers_L

__all__ = [
    "INF", "Infinity", "DegenerateInput", "IdealTetrahedron", "cross_ratio",
    "euclidean_volume", "EuclideanVolume", "ideal_volume", "ideal_volume_parts",
    "IdealVolume", "prop1_phase", "prop2_check", "NORMALIZATION",
]

# phase = eps * vol_H with eps = 6 * vol_E
NORMALIZATION = "epsilon"


class Infinity:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INF"


INF = Infinity()


class DegenerateInput(ValueError):
    """Coincident vertices."""


def _pt(z):
    if z is INF:
        return INF
    z = complex(z)
    if not cmath.isfinite(z):
        return INF
    return z


def _diff(a, b):
    """``a - b`` with ``INF`` kept symbolic."""
    if a is INF or b is INF:
        return INF
    return a - b


def cross_ratio(z1, z2, z3, z4) -> complex:
    """``(z1-z3)(z2-z4) / ((z1-z4)(z2-z3))``; factors with ``INF`` cancel pairwise."""
    pts = [_pt(z) for z in (z1, z2, z3, z4)]
    for i in range(4):
        for j in range(i):
            a, b = pts[i], pts[j]
            if (a is INF and b is INF) or (a is not INF and b is not INF and a == b):
                raise DegenerateInput("cross_ratio needs four distinct points")
    p1, p2, p3, p4 = pts
    num = [_diff(p1, p3), _diff(p2, p4)]
    den = [_diff(p1, p4), _diff(p2, p3)]
    # INF appears in exactly one numerator and one denominator factor
    num = [x for x in num if x is not INF]
    den = [x for x in den if x is not INF]
    n = 1 + 0j
    for x in num:
        n *= x
    d = 1 + 0j
    for x in den:
        d *= x
    return n / d


class IdealTetrahedron(NamedTuple):
    v1: object
    v2: object
    v3: object
    v4: object

    def cross_ratio(self):
        return cross_ratio(*self)


class EuclideanVolume(NamedTuple):
    volume: Fraction
    determinant: int


def euclidean_volume(w1, w2, w3) -> EuclideanVolume:
    det = epsilon_triple(w1, w2, w3)
    return EuclideanVolume(Fraction(det, 6), det)


class IdealVolume(NamedTuple):
    bloch_wigner: float
    im_rogers: float
    flat: bool
    cross_ratio: complex


def ideal_volume_parts(T) -> IdealVolume:
    """Bloch-Wigner volume and ``Im L`` of the cross-ratio of ``T``."""
    cr = cross_ratio(*T)
    if cr.imag == 0:
        return IdealVolume(0.0, 0.0, True, cr)
    return IdealVolume(bloch_wigner(cr), rogers_L(cr).imag, False, cr)


def ideal_volume(T) -> float:
    return ideal_volume_parts(T).bloch_wigner


def _wrap(x):
    return (x + math.pi) % (2 * math.pi) - math.pi


def _winding(x):
    return as_label(x).winding if not isinstance(x, tuple) or len(x) != 3 else x


def prop1_phase(w1, w2, w3, z, w):
    """Phase of the pure-winding 4-point function against ``eps * vol(INF, 0, z, w)``."""
    a, b, c = (label(_winding(x)) for x in (w1, w2, w3))
    z, w = complex(z), complex(w)
    _, form = four_point_closed(a + b + c, a, b, c, 0)
    phase = cmath.phase(form.evaluate(z, w))
    eps = epsilon_triple(a.winding, b.winding, c.winding)
    vol = ideal_volume_parts(IdealTetrahedron(INF, 0, z, w))
    predicted = eps * vol.im_rogers
    return {
        "normalization": NORMALIZATION,
        "epsilon": eps,
        "euclidean_volume": euclidean_volume(a.winding, b.winding, c.winding).volume,
        "cross_ratio": vol.cross_ratio,
        "im_rogers": vol.im_rogers,
        "bloch_wigner": vol.bloch_wigner,
        "phase": phase,
        "predicted": predicted,
        "residual": abs(_wrap(phase - predicted)),
    }


def prop2_check(w1, w2, w3, w4, z1, z2, z3):
    """Phase of the pure-winding 5-point function as a sum over four ideal tetrahedra.

    With ``z4 = 0`` the tetrahedron dropping ``z_i`` is spanned by ``INF`` and
    the remaining three points; it is paired with the Euclidean tetrahedron of
    the three windings other than ``w_i``.
    """
    labs = [label(_winding(x)) for x in (w1, w2, w3, w4)]
    pts = [complex(z1), complex(z2), complex(z3), 0j]
    psi = labs[0] + labs[1] + labs[2] + labs[3]
    form = five_point_form(psi, *labs)
    phase = cmath.phase(form.evaluate(*pts[:3]))
    terms = []
    predicted = 0.0
    for i in range(4):
        rest = [j for j in range(4) if j != i]
        eps = epsilon_triple(*(labs[j].winding for j in rest))
        # INF first, then the remaining points with the latest insertion second
        a, b, c = (pts[j] for j in rest)
        vol = ideal_volume_parts(IdealTetrahedron(INF, c, a, b))
        predicted += eps * vol.im_rogers
        terms.append({"dropped": i + 1, "epsilon": eps, "cross_ratio": vol.cross_ratio,
                      "im_rogers": vol.im_rogers, "bloch_wigner": vol.bloch_wigner})
    return {
        "normalization": NORMALIZATION,
        "phase": phase,
        "predicted": predicted,
        "terms": terms,
        "residual": abs(_wrap(phase - predicted)),
    }
