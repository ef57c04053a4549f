"""Fast exact evaluation of two-insertion matrix elements.

For ``<g'+a| e^a(z) e^b(w) |g>`` the ket side ``e^b(w)|g>`` is built on a
fixed monomial basis (all PBW monomials of weight at most ``K``), and the
bra side is the functional ``Phi(m) = <g'| exp(a(z)_+) m |g'>`` evaluated by
peeling off the first creator of ``m``.  The matrix element is then a dot
product of the two tables, graded by weight.

The heavy loops exist twice: the pure-Python evaluator below (``Fraction``
arithmetic) and the compiled ``_fastcore`` extension, which works with
integers scaled by a common denominator.  ``backend()`` reports which one
is active; ``HDFT_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement

from ._kernel_py import Kernel, code, decode, weight, _EPS

try:
    if os.environ.get("HDFT_PURE_PYTHON"):
        raise ImportError("fallback forced")
    from . import _fastcore
except ImportError:
    _fastcore = None


def backend():
    return "compiled" if _fastcore is not None else "python"


def _codes(K):
    return [code(kind, k, n) for n in range(1, K + 1) for kind in (0, 1) for k in (1, 2, 3)]


def enumerate_basis(K):
    """All sorted creator tuples of total weight at most ``K``, by weight."""
    by_weight = [[] for _ in range(K + 1)]
    by_weight[0].append(())
    codes = sorted(_codes(K))

    def rec(start, mono, wt):
        for idx in range(start, len(codes)):
            c = codes[idx]
            n = c >> 3
            if wt + n > K:
                continue
            m = mono + (c,)
            by_weight[wt + n].append(m)
            rec(idx, m, wt + n)

    rec(0, (), 0)
    out = []
    for lst in by_weight:
        out.extend(sorted(lst))
    return out


def ccode_index(kind, k, n, K):
    return (kind * 3 + (k - 1)) * K + (n - 1)


class Tables:
    """Exact operator tables on the weight-``K`` monomial basis."""

    def __init__(self, K, flux=True):
        self.K = K
        self.flux = flux
        kern = Kernel(flux=flux, exact=True)
        basis = enumerate_basis(K)
        self.basis = basis
        self.index = {m: i for i, m in enumerate(basis)}
        N = len(basis)
        self.N = N
        self.wt = [weight(m) for m in basis]
        idx = self.index

        def conv(pairs):
            return tuple((idx[m], v) for m, v in pairs if v)

        # creation: ins[ci][id]
        self.ins = [[()] * N for _ in range(6 * K)]
        for kind in (0, 1):
            for k in (1, 2, 3):
                for n in range(1, K + 1):
                    row = self.ins[ccode_index(kind, k, n, K)]
                    c = code(kind, k, n)
                    for i, m in enumerate(basis):
                        if self.wt[i] + n <= K:
                            row[i] = conv(kern.insert(c, m))
        self.qd = [[conv(kern.qderiv(i, m)) for m in basis] for i in (1, 2, 3)]
        self.der = [[self._derivation(j, m) for m in basis] for j in (1, 2, 3)]
        # x-annihilators: annx[k-1][d-1][id] -> ((id2, c0), ...)
        self.annx = [[[()] * N for _ in range(K)] for _ in range(3)]
        for k in (1, 2, 3):
            for d in range(1, K + 1):
                row = self.annx[k - 1][d - 1]
                a = code(0, k, d)
                for i, m in enumerate(basis):
                    if self.wt[i] < d:
                        continue
                    out = []
                    for m2, c0, c1, c2, c3 in kern.annihilate(a, m):
                        if c1 or c2 or c3:
                            raise AssertionError("x annihilator produced a W term")
                        if c0:
                            out.append((idx[m2], c0))
                    row[i] = tuple(out)
        self.first = []
        for m in basis:
            if not m:
                self.first.append(None)
                continue
            kind, j, mm = decode(m[0])
            self.first.append((kind, j, mm, idx[m[1:]]))

    def _derivation(self, j, mono):
        if not self.flux:
            return ()
        acc = {}
        for pos, c in enumerate(mono):
            kind, i, n = decode(c)
            if not kind or i == j:
                continue
            k, s = _EPS[(i, j)]
            mm = tuple(sorted(mono[:pos] + mono[pos + 1:] + (code(0, k, n),)))
            acc[mm] = acc.get(mm, 0) + Fraction(s, 2 * n)
        return tuple((self.index[m], v) for m, v in acc.items() if v)


@lru_cache(maxsize=8)
def tables(K, flux=True):
    return Tables(K, flux)


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


# ---------------------------------------------------------------- pure Python

def _padd(d, i, p, v):
    row = d.setdefault(i, {})
    nv = row.get(p, 0) + v
    if nv:
        row[p] = nv
    else:
        row.pop(p, None)
        if not row:
            del d[i]


def ket_py(T, w, p, lc):
    """``e^b(w)|g>`` without its label shift and ``w^{(b,g)}``: ``{id: {lpow: c}}``.

    ``w, p`` are the inserted label, ``lc = w x g``.
    """
    K = T.K
    out = {0: {0: Fraction(1)}}
    cur = out
    gens = []
    for k in (1, 2, 3):
        for n in range(1, K + 1):
            if w[k - 1]:
                gens.append((ccode_index(1, k, n, K), n, Fraction(w[k - 1]), 0))
            if p[k - 1]:
                gens.append((ccode_index(0, k, n, K), n, Fraction(p[k - 1]), 0))
            if T.flux and lc[k - 1]:
                gens.append((ccode_index(0, k, n, K), n, Fraction(lc[k - 1], 2), 1))
    r = 0
    while cur:
        r += 1
        nxt = {}
        for i, poly in cur.items():
            wt = T.wt[i]
            for ci, n, cf, lp in gens:
                if wt + n > K:
                    continue
                for j, c in T.ins[ci][i]:
                    f = cf * c / r
                    for a, v in poly.items():
                        _padd(nxt, j, a + lp, v * f)
        cur = nxt
        out = _merge(out, cur)
    # exp(l N) with N = sum_i w_i [Q_i, .]
    out = _exp_op(out, [(T.qd[i], w[i]) for i in range(3) if w[i]], 1)
    # exp(sum_j w_j D_j)
    out = _exp_op(out, [(T.der[j], w[j]) for j in range(3) if w[j]], 0)
    return out


def _merge(a, b):
    res = {i: dict(p) for i, p in a.items()}
    for i, poly in b.items():
        for k, v in poly.items():
            _padd(res, i, k, v)
    return res


def _exp_op(state, ops, lshift):
    out = state
    cur = state
    r = 0
    while cur and ops:
        r += 1
        nxt = {}
        for i, poly in cur.items():
            for table, c in ops:
                for j, v0 in table[i]:
                    f = v0 * c / r
                    for a, v in poly.items():
                        _padd(nxt, j, a + lshift, v * f)
        cur = nxt
        out = _merge(out, cur)
    return out


def phi_scalars(K, w, p, g, flux=True):
    """Per-creator data of the Phi recursion for bra insertion ``(w, p)`` on label ``g``."""
    lc = _cross(w, g) if flux else (0, 0, 0)
    S = {}
    A = {}
    for j in (1, 2, 3):
        for m in range(1, K + 1):
            s = Fraction(0)
            half = Fraction(0)
            ann = []
            if flux:
                for i in (1, 2, 3):
                    if i == j or not w[i - 1]:
                        continue
                    k, sg = _EPS[(i, j)]
                    s += Fraction(sg * w[i - 1] * g[k - 1], m * m)
                    for n in range(1, m):
                        coef = Fraction(sg * w[i - 1] * (m - n), 2 * n * m)
                        half += coef * Fraction(-w[k - 1], m - n)
                    for n in range(m + 1, K + 1):
                        coef = Fraction(sg * w[i - 1] * (m - n), 2 * n * m)
                        ann.append((k, n - m, coef))
            s0 = s - Fraction(p[j - 1], m) + half / 2
            s1 = -Fraction(lc[j - 1], 2 * m)
            S[(j, m)] = (s0, s1)
            A[(j, m)] = tuple(ann)
    return S, A


def phi_py(T, w, p, g):
    """``Phi(id) = <g| exp(a(z)_+) m_id |g>`` as ``[{lpow: c}]`` (``z^-wt`` implicit)."""
    S, A = phi_scalars(T.K, w, p, g, T.flux)
    N = T.N
    phi = [None] * N
    phi[0] = {0: Fraction(1)}
    for i in range(1, N):
        kind, j, m, rest = T.first[i]
        base = phi[rest]
        res = {}
        if kind == 0:
            f = Fraction(-w[j - 1], m)
            if f:
                for a, v in base.items():
                    res[a] = v * f
        else:
            s0, s1 = S[(j, m)]
            for a, v in base.items():
                if s0:
                    res[a] = res.get(a, 0) + v * s0
                if s1:
                    res[a + 1] = res.get(a + 1, 0) + v * s1
            wr = T.wt[rest]
            for k, d, coef in A[(j, m)]:
                if d > wr:
                    continue
                for i2, c0 in T.annx[k - 1][d - 1][rest]:
                    f = coef * c0
                    for a, v in phi[i2].items():
                        res[a] = res.get(a, 0) + v * f
        phi[i] = {a: v for a, v in res.items() if v}
    return phi


def dot_py(T, ket, phi):
    """``{(wt, lz_pow, lw_pow): c}`` from a ket table and a bra functional."""
    out = {}
    for i, kp in ket.items():
        ph = phi[i]
        if not ph:
            continue
        wt = T.wt[i]
        for b, vb in kp.items():
            for a, va in ph.items():
                key = (wt, a, b)
                out[key] = out.get(key, 0) + va * vb
    return {k: v for k, v in out.items() if v}


# ---------------------------------------------------------------- dispatch

class Engine:
    """Caches ket tables per ``(b, b x g)`` and bra functionals per ``(a, a x g')``."""

    def __init__(self, K, flux=True, use_compiled=None):
        self.K = K
        self.flux = flux
        self.T = tables(K, flux)
        if use_compiled is None:
            use_compiled = _fastcore is not None
        if use_compiled and _fastcore is None:
            raise ImportError("compiled core not available")
        self.compiled = bool(use_compiled)
        self._ket = {}
        self._phi = {}
        self._ct = None
        if self.compiled:
            self._ct = _fastcore.CTables(self.T)

    def ket(self, w, p, g):
        lc = _cross(w, g) if self.flux else (0, 0, 0)
        key = (w, p, lc)
        hit = self._ket.get(key)
        if hit is None:
            if self.compiled:
                hit = self._ct.ket(w, p, lc)
            else:
                hit = ket_py(self.T, w, p, lc)
            self._ket[key] = hit
        return hit

    def phi(self, w, p, g):
        lc = _cross(w, g) if self.flux else (0, 0, 0)
        key = (w, p, lc)
        hit = self._phi.get(key)
        if hit is None:
            if self.compiled:
                hit = self._ct.phi(w, p, g)
            else:
                hit = phi_py(self.T, w, p, g)
            self._phi[key] = hit
        return hit

    def matrix_element(self, a, b, g):
        """Graded coefficients of ``<g+a+b| e^a(z) e^b(w) |g>`` without pairing prefactors.

        ``a, b, g`` are ``(winding, momentum)`` pairs; the result maps
        ``(n, lz_pow, lw_pow)`` to the coefficient of ``(w/z)^n l_z^i l_w^j``.
        """
        gw = g[0]
        g2 = tuple(x + y for x, y in zip(gw, b[0]))
        ket = self.ket(b[0], b[1], gw)
        phi = self.phi(a[0], a[1], g2)
        if self.compiled:
            return self._ct.dot(ket, phi)
        return dot_py(self.T, ket, phi)

    def clear(self):
        self._ket.clear()
        self._phi.clear()
