"""Ground-state counting on the twisted torus and the Heisenberg nilmanifold.

Counting functions return moduli, never cardinalities: a modulus of ``0``
stands for ``Z/0Z = Z`` and is reported with ``free=True``.
"""

from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

__all__ = [
    "MagneticTorusData", "SectorLabel", "SectorCount", "TwistedCount",
    "HeisenbergCount", "theta", "theta_abs_scan", "theta_peaks",
    "bs_count_magnetic", "holonomy_exponent", "holonomy_phase",
    "holonomy_cocycle_defect", "bs_count_twisted", "heisenberg_sector_count",
    "duality_label_table", "table_csv", "GAUGE",
]

GAUGE = "A_w = w1 x2 dx3, B = x1 dx2 dx3, iota_w B = B(., w)"

_TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class MagneticTorusData:
    chern: int

    def __post_init__(self):
        if int(self.chern) != self.chern:
            raise ValueError("chern number must be an integer")


@dataclass(frozen=True)
class SectorLabel:
    """One sector: side, integer 3-tuple, internal label ``p1``.

    Torus side: ``data = (w1, w2, w3)``.  Heisenberg side: ``data = (w2, w3, k)``
    with ``k`` the fibre momentum and ``p1`` the central matrix entry.
    ``internal`` is reduced mod ``modulus`` unless the modulus is ``0``.
    ``leaves`` is the secondary modulus: ``|w1|`` BS leaves on the torus
    side, ``|k|`` Landau levels on the Heisenberg side.
    """

    side: str
    data: tuple
    internal: int
    modulus: int
    leaves: int

    def __post_init__(self):
        if self.side not in ("twisted_torus", "heisenberg"):
            raise ValueError(f"unknown side {self.side!r}")
        if self.modulus < 0 or self.leaves < 0:
            raise ValueError("moduli are non-negative")
        if self.modulus:
            object.__setattr__(self, "internal", self.internal % self.modulus)

    @property
    def free(self):
        return self.modulus == 0

    @property
    def leaves_free(self):
        return self.leaves == 0


class SectorCount(NamedTuple):
    count: int
    free: bool


class TwistedCount(NamedTuple):
    modulus: int
    free: bool
    leaves: int
    leaves_free: bool


class HeisenbergCount(NamedTuple):
    modulus: int
    free: bool
    landau_levels: int
    landau_free: bool


# ---------------------------------------------------------------- theta

def _theta_cut(t):
    return math.sqrt(37.0 / t)


def theta(t, n, x1, x2) -> complex:
    """``sum_g exp(-t (x2+g)^2) q^(n g x1)`` with ``q = exp(2 pi i)``."""
    t = float(t)
    if not t > 0:
        raise ValueError("theta needs t > 0")
    n = int(n)
    x1, x2 = float(x1), float(x2)
    cut = _theta_cut(t)
    lo = math.ceil(-cut - x2)
    hi = math.floor(cut - x2)
    gs = sorted(range(lo, hi + 1), key=lambda g: -abs(x2 + g))
    re, im = [], []
    for g in gs:
        a = math.exp(-t * (x2 + g) ** 2)
        # reduce the phase argument mod 1 before scaling
        ph = math.fmod(n * g * x1, 1.0) * 2 * math.pi
        re.append(a * math.cos(ph))
        im.append(a * math.sin(ph))
    return complex(math.fsum(re), math.fsum(im))


def theta_abs_scan(t, n, x2=0.0, grid=1000):
    """``|theta|`` on ``x1 = j/grid``, ``j < grid``."""
    t = float(t)
    if not t > 0:
        raise ValueError("theta needs t > 0")
    cut = _theta_cut(t)
    g = np.arange(math.ceil(-cut - x2), math.floor(cut - x2) + 1)
    x1 = np.arange(grid) / grid
    w = np.exp(-t * (x2 + g) ** 2)
    ph = np.exp(_TWO_PI_I * np.mod(np.outer(x1, int(n) * g), 1.0))
    return x1, np.abs(ph @ w)


def theta_peaks(t, n, x2=0.0, grid=1000, rel=0.5):
    """Grid positions of local maxima of ``|theta|`` above ``rel`` of the maximum."""
    x1, a = theta_abs_scan(t, n, x2, grid)
    top = a.max()
    left, right = np.roll(a, 1), np.roll(a, -1)
    idx = np.nonzero((a >= left) & (a > right) & (a >= rel * top))[0]
    return [float(x1[i]) for i in idx]


def bs_count_magnetic(n) -> SectorCount:
    """Number of Bohr-Sommerfeld leaves of ``A = n x1 dx2``."""
    n = MagneticTorusData(int(n)).chern
    return SectorCount(abs(n), n == 0)


# ---------------------------------------------------------------- holonomy

def _q(v):
    return Fraction(v) if isinstance(v, (int, Fraction)) else v


def _eps_pol(w, x, g):
    return w[0] * x[1] * g[2] - w[1] * x[0] * g[2] + w[2] * x[0] * g[1]


def holonomy_exponent(w, gamma, x, path="straight"):
    """Exponent of ``Hol_w(gamma, x)``.

    ``path="straight"`` integrates ``iota_w B + A_w`` along ``x -> x+gamma``;
    the ``x``-linear part is ``eps_pol(w, x, gamma)`` and the rest is
    quadratic in ``gamma``.  ``path="polarized"`` drops the quadratic part.
    Integer and Fraction inputs give an exact Fraction.
    """
    w = tuple(int(a) for a in w)
    g = tuple(int(a) for a in gamma)
    x = tuple(_q(a) for a in x)
    if len(w) != 3 or len(g) != 3 or len(x) != 3:
        raise ValueError("w, gamma and x are 3-vectors")
    lin = _eps_pol(w, x, g)
    if path == "polarized":
        return lin
    if path != "straight":
        raise ValueError("path must be 'straight' or 'polarized'")
    quad = Fraction(g[0] * (w[2] * g[1] - w[1] * g[2]) + w[0] * g[1] * g[2], 2)
    return lin + quad


def holonomy_phase(w, gamma, x, path="straight") -> complex:
    e = holonomy_exponent(w, gamma, x, path)
    if isinstance(e, Fraction):
        e = e - math.floor(e)
    return cmath.exp(_TWO_PI_I * float(e))


def holonomy_cocycle_defect(w, g1, g2, x, path="straight"):
    """``E(g1, x) + E(g2, x+g1) - E(g1+g2, x)``; an integer iff the phases multiply."""
    x = tuple(_q(a) for a in x)
    x2 = tuple(a + b for a, b in zip(x, g1))
    g12 = tuple(a + b for a, b in zip(g1, g2))
    return (holonomy_exponent(w, g1, x, path) + holonomy_exponent(w, g2, x2, path)
            - holonomy_exponent(w, g12, x, path))


# ---------------------------------------------------------------- counting

def bs_count_twisted(w) -> TwistedCount:
    w1, w2, w3 = (int(a) for a in w)
    g = math.gcd(abs(w2), abs(w3))
    return TwistedCount(g, g == 0, abs(w1), w1 == 0)


def heisenberg_sector_count(w2, w3, k) -> HeisenbergCount:
    g = math.gcd(abs(int(w2)), abs(int(w3)))
    k = int(k)
    return HeisenbergCount(g, g == 0, abs(k), k == 0)


def _reps(modulus, N):
    return range(modulus) if modulus else range(-N, N + 1)


def _twisted_sectors(N):
    for w1 in range(-N, N + 1):
        for w2 in range(-N, N + 1):
            for w3 in range(-N, N + 1):
                c = bs_count_twisted((w1, w2, w3))
                for p1 in _reps(c.modulus, N):
                    yield SectorLabel("twisted_torus", (w1, w2, w3), p1, c.modulus, c.leaves)


def _heisenberg_sectors(N):
    # (w2, w3) and the class entry p1 from the upper-triangular matrix,
    # k the fibre momentum
    for w2 in range(-N, N + 1):
        for w3 in range(-N, N + 1):
            for k in range(-N, N + 1):
                c = heisenberg_sector_count(w2, w3, k)
                for p1 in _reps(c.modulus, N):
                    yield SectorLabel("heisenberg", (w2, w3, k), p1, c.modulus, c.landau_levels)


def _dual(s: SectorLabel) -> SectorLabel:
    """Torus winding ``w1`` becomes the fibre momentum, torus ``p1`` the class entry."""
    w1, w2, w3 = s.data
    c = heisenberg_sector_count(w2, w3, w1)
    return SectorLabel("heisenberg", (w2, w3, w1), s.internal, c.modulus, c.landau_levels)


def _key(s):
    return s.data, s.internal


def duality_label_table(bound):
    """Enumerate both sides in ``[-N, N]`` and test that ``w1 <-> p1`` is a bijection."""
    N = int(bound)
    if N < 1:
        raise ValueError("bound must be >= 1")
    heis = {_key(s): s for s in _heisenberg_sectors(N)}
    seen = set()
    rows = []
    mismatch = None
    n_twisted = 0
    for s in _twisted_sectors(N):
        n_twisted += 1
        d = _dual(s)
        k = _key(d)
        target = heis.get(k)
        row = {
            "w1": s.data[0], "w2": s.data[1], "w3": s.data[2], "p1": s.internal,
            "twisted_modulus": s.modulus, "twisted_leaves": s.leaves,
            "heisenberg_modulus": None if target is None else target.modulus,
            "landau_levels": None if target is None else target.leaves,
        }
        rows.append(row)
        if mismatch is not None:
            continue
        if target is None:
            mismatch = {"reason": "no image", "sector": row}
        elif k in seen:
            mismatch = {"reason": "collision", "sector": row}
        elif (target.modulus, target.leaves, target.free, target.leaves_free) != \
                (s.modulus, s.leaves, s.free, s.leaves_free):
            mismatch = {"reason": "moduli differ", "sector": row}
        seen.add(k)
    if mismatch is None and len(seen) != len(heis):
        missing = next(k for k in heis if k not in seen)
        mismatch = {"reason": "not surjective", "sector": {"heisenberg": missing}}
    return {
        "bound": N,
        "gauge": GAUGE,
        "twisted_sectors": n_twisted,
        "heisenberg_sectors": len(heis),
        "bijection": mismatch is None,
        "first_mismatch": mismatch,
        "rows": rows,
    }


def table_csv(report) -> str:
    buf = io.StringIO()
    cols = ["w1", "w2", "w3", "p1", "twisted_modulus", "twisted_leaves",
            "heisenberg_modulus", "landau_levels"]
    wr = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    wr.writeheader()
    for r in report["rows"]:
        wr.writerow(r)
    return buf.getvalue()
