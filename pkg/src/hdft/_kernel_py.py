"""Pure-Python oscillator kernel.

Oscillator modes are packed into small integers, ``code = (n << 3) | (kind << 2) | i``
with ``n >= 1`` the absolute mode number, ``kind`` 0 for ``x`` and 1 for ``x*``
and ``i`` in 1..3 the direction.  The same code names the creator (mode ``-n``)
or the annihilator (mode ``+n``); which one is meant follows from the call.

A monomial is a sorted tuple of creator codes.  Ordering the creators by code
gives a PBW basis of the creation subalgebra: the ``x`` creators are central
there and reordering two ``x*`` creators produces a single ``x`` creator.
"""

from bisect import insort
from fractions import Fraction

_EPS = {(1, 2): (3, 1), (2, 3): (1, 1), (3, 1): (2, 1),
        (2, 1): (3, -1), (3, 2): (1, -1), (1, 3): (2, -1)}


def code(kind, i, n):
    return (n << 3) | (kind << 2) | i


def decode(c):
    return (c >> 2) & 1, c & 3, c >> 3


def weight(mono):
    return sum(c >> 3 for c in mono)


def plain_insert(mono, c):
    lst = list(mono)
    insort(lst, c)
    return tuple(lst)


class Kernel:
    """Memoised bracket bookkeeping on monomials.

    ``exact`` selects Fraction coefficients, otherwise floats.  ``flux=False``
    sets the structure tensor to zero.
    """

    def __init__(self, flux=True, exact=True):
        self.flux = bool(flux)
        self.exact = bool(exact)
        self._one = Fraction(1) if exact else 1.0
        self._ins = {}
        self._ann = {}
        self._qd = {}

    def num(self, p, q=1):
        if self.exact:
            return Fraction(p, q)
        return p / q

    def insert(self, c, mono):
        """``c * mono`` expanded in the PBW basis, as ``((mono, coef), ...)``."""
        key = (c, mono)
        hit = self._ins.get(key)
        if hit is not None:
            return hit
        if not mono or c <= mono[0]:
            out = (((c,) + mono, self._one),)
        elif not (c >> 2) & 1:
            out = ((plain_insert(mono, c), self._one),)
        else:
            acc = {}
            c1 = mono[0]
            rest = mono[1:]
            for m, v in self.insert(c, rest):
                mm = plain_insert(m, c1)
                acc[mm] = acc.get(mm, 0) + v
            if self.flux and (c1 >> 2) & 1:
                _, i, m_ = decode(c)
                _, j, n_ = decode(c1)
                if i != j:
                    k, s = _EPS[(i, j)]
                    coef = self.num(-s * (m_ + n_), 2 * m_ * n_)
                    mm = plain_insert(rest, code(0, k, m_ + n_))
                    acc[mm] = acc.get(mm, 0) + coef
            out = tuple((m, v) for m, v in acc.items() if v != 0)
        self._ins[key] = out
        return out

    def annihilate(self, a, mono):
        """Action of the annihilator ``a`` on ``mono|g>``.

        Returns ``((mono', c0, c1, c2, c3), ...)``; the scalar in front of
        ``mono'|g>`` is ``c0 + c1 w1 + c2 w2 + c3 w3`` with ``w`` the winding
        of the ground label, which is how ``W^k`` acts once it reaches the
        label.
        """
        key = (a, mono)
        hit = self._ann.get(key)
        if hit is not None:
            return hit
        if not mono:
            self._ann[key] = ()
            return ()
        acc = {}
        c1 = mono[0]
        rest = mono[1:]
        ka, ia, na = decode(a)
        kc, ic, mc = decode(c1)

        def bump(m, slot, v):
            row = acc.get(m)
            if row is None:
                row = [0, 0, 0, 0]
                acc[m] = row
            row[slot] += v

        if ka:
            if not kc:
                if ia == ic and na == mc:
                    bump(rest, 0, self.num(-1, na))
            elif self.flux and ia != ic:
                k, s = _EPS[(ia, ic)]
                if na == mc:
                    bump(rest, k, self.num(s, na * na))
                else:
                    coef = self.num(-s * (na - mc), 2 * na * mc)
                    d = na - mc
                    if d > 0:
                        for m, v0, v1, v2, v3 in self.annihilate(code(0, k, d), rest):
                            row = acc.get(m)
                            if row is None:
                                row = [0, 0, 0, 0]
                                acc[m] = row
                            row[0] += coef * v0
                            row[1] += coef * v1
                            row[2] += coef * v2
                            row[3] += coef * v3
                    else:
                        bump(plain_insert(rest, code(0, k, -d)), 0, coef)
        elif kc and ia == ic and na == mc:
            bump(rest, 0, self.num(-1, na))
        for m, v0, v1, v2, v3 in self.annihilate(a, rest):
            mm = plain_insert(m, c1)
            row = acc.get(mm)
            if row is None:
                row = [0, 0, 0, 0]
                acc[mm] = row
            row[0] += v0
            row[1] += v1
            row[2] += v2
            row[3] += v3
        out = tuple((m, r[0], r[1], r[2], r[3]) for m, r in acc.items() if any(r))
        self._ann[key] = out
        return out

    def qderiv(self, i, mono):
        """``[Q_i, mono]``: each ``x*_{j,-n}`` becomes ``-1/2 eps_ijk x^k_{-n}``."""
        key = (i, mono)
        hit = self._qd.get(key)
        if hit is not None:
            return hit
        acc = {}
        if self.flux:
            for pos, c in enumerate(mono):
                if not (c >> 2) & 1:
                    continue
                _, j, n = decode(c)
                if j == i:
                    continue
                k, s = _EPS[(i, j)]
                mm = plain_insert(mono[:pos] + mono[pos + 1:], code(0, k, n))
                acc[mm] = acc.get(mm, 0) + self.num(-s, 2)
        out = tuple((m, v) for m, v in acc.items() if v != 0)
        self._qd[key] = out
        return out

    def shift(self, wb, mono):
        """Conjugation by ``exp(beta_0)`` for a winding ``wb``.

        Each ``x*_{i,-n}`` picks up ``(1/2n) eps_ijk wb_j x^k_{-n}``.
        """
        terms = {(): self._one}
        for c in mono:
            kind, i, n = decode(c)
            extra = []
            if kind and self.flux:
                for j in (1, 2, 3):
                    if j == i or not wb[j - 1]:
                        continue
                    k, s = _EPS[(i, j)]
                    extra.append((code(0, k, n), self.num(s * wb[j - 1], 2 * n)))
            nxt = {}
            for m, v in terms.items():
                mm = plain_insert(m, c)
                nxt[mm] = nxt.get(mm, 0) + v
                for x, cx in extra:
                    mm = plain_insert(m, x)
                    nxt[mm] = nxt.get(mm, 0) + v * cx
            terms = nxt
        return tuple((m, v) for m, v in terms.items() if v != 0)
