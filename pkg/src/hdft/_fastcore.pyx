# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled loops for the correlator engine.

Values are int64 numerators over a common denominator ``D``.  Every
multiply-divide is checked for exactness and overflow; an inexact quotient
makes the caller retry with a larger ``D``, an overflow raises
``OverflowError`` so the pure-Python path can take over.
"""

from fractions import Fraction
from math import gcd

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t, int32_t
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef extern from "_fastcore_ops.h":
    ctypedef long long hdft_i128
    int hdft_muldiv_add(int64_t *acc, int64_t v, int64_t num, int64_t den) nogil
    int hdft_add(int64_t *acc, int64_t v) nogil
    int hdft_fma128(hdft_i128 *acc, int64_t a, int64_t b) nogil
    int64_t hdft_hi(hdft_i128 x) nogil
    uint64_t hdft_lo(hdft_i128 x) nogil

DEFAULT_DENOMINATOR = (2 ** 16) * (3 ** 8) * (5 ** 4) * (7 ** 2)


class Inexact(ArithmeticError):
    def __init__(self, den):
        super().__init__(den)
        self.den = den


def _csr(rows):
    ptr = np.zeros(len(rows) + 1, dtype=np.int64)
    n = sum(len(r) for r in rows)
    col = np.zeros(max(n, 1), dtype=np.int32)
    num = np.zeros(max(n, 1), dtype=np.int64)
    den = np.ones(max(n, 1), dtype=np.int64)
    pos = 0
    for i, r in enumerate(rows):
        for j, v in r:
            v = Fraction(v)
            col[pos] = j
            num[pos] = v.numerator
            den[pos] = v.denominator
            pos += 1
        ptr[i + 1] = pos
    return ptr, col, num, den


def _ket_generators(w, p, lc, K, flux):
    gens = []
    for k in range(3):
        for n in range(1, K + 1):
            if w[k]:
                gens.append(((3 + k) * K + n - 1, n, w[k], 1, 0))
            if p[k]:
                gens.append((k * K + n - 1, n, p[k], 1, 0))
            if flux and lc[k]:
                gens.append((k * K + n - 1, n, lc[k], 2, 1))
    return gens


def gens_array(gens):
    if not gens:
        return np.zeros((1, 5), dtype=np.int64)
    return np.array(gens, dtype=np.int64).reshape(len(gens), 5)


def _pack_phi_scalars(S, A, K):
    # creator data indexed by (j-1)*K + (m-1)
    s0n = np.zeros(3 * K, dtype=np.int64)
    s0d = np.ones(3 * K, dtype=np.int64)
    s1n = np.zeros(3 * K, dtype=np.int64)
    s1d = np.ones(3 * K, dtype=np.int64)
    aptr = np.zeros(3 * K + 1, dtype=np.int64)
    ak, ad, an, adn = [], [], [], []
    for j in range(1, 4):
        for m in range(1, K + 1):
            idx = (j - 1) * K + m - 1
            v0, v1 = S[(j, m)]
            s0n[idx], s0d[idx] = v0.numerator, v0.denominator
            s1n[idx], s1d[idx] = v1.numerator, v1.denominator
            for k, d, coef in A[(j, m)]:
                ak.append(k)
                ad.append(d)
                an.append(coef.numerator)
                adn.append(coef.denominator)
            aptr[idx + 1] = len(ak)
    arr = lambda v, pad: np.array(v + [pad], dtype=np.int64)
    return (s0n, s0d, s1n, s1d, aptr, arr(ak, 0), arr(ad, 0), arr(an, 0), arr(adn, 1))


cdef inline int _check(int err, int64_t den) except -1:
    if err == 1:
        raise Inexact(den)
    if err == 2:
        raise OverflowError("scaled integer overflow")
    if err == 3:
        raise OverflowError("log power beyond table width")
    return 0


cdef class CTables:
    """C-side copy of a :class:`hdft._engine.Tables` instance."""

    cdef public int N, K, L
    cdef public object flux
    cdef int32_t[:] wt
    cdef int64_t[:] ins_ptr, qd_ptr, der_ptr, ann_ptr
    cdef int32_t[:] ins_col, qd_col, der_col, ann_col
    cdef int64_t[:] ins_num, ins_den, qd_num, qd_den, der_num, der_den, ann_num, ann_den
    cdef int32_t[:] f_kind, f_j, f_m, f_rest
    cdef object _keep

    def __init__(self, T):
        self.N = T.N
        self.K = T.K
        self.L = T.K + 2
        self.flux = T.flux
        N, K = T.N, T.K
        self.wt = np.asarray(T.wt, dtype=np.int32)
        ins_rows = [T.ins[ci][i] for ci in range(6 * K) for i in range(N)]
        a = _csr(ins_rows)
        self.ins_ptr, self.ins_col, self.ins_num, self.ins_den = a
        b = _csr([T.qd[i][n] for i in range(3) for n in range(N)])
        self.qd_ptr, self.qd_col, self.qd_num, self.qd_den = b
        c = _csr([T.der[i][n] for i in range(3) for n in range(N)])
        self.der_ptr, self.der_col, self.der_num, self.der_den = c
        d = _csr([T.annx[k][dd][n] for k in range(3) for dd in range(K) for n in range(N)])
        self.ann_ptr, self.ann_col, self.ann_num, self.ann_den = d
        fk = np.zeros(N, dtype=np.int32)
        fj = np.zeros(N, dtype=np.int32)
        fm = np.zeros(N, dtype=np.int32)
        fr = np.zeros(N, dtype=np.int32)
        for i, f in enumerate(T.first):
            if f is None:
                continue
            fk[i], fj[i], fm[i], fr[i] = f
        self.f_kind, self.f_j, self.f_m, self.f_rest = fk, fj, fm, fr
        self._keep = (a, b, c, d)

    # ------------------------------------------------------------ ket side

    def ket(self, w, p, lc):
        D = DEFAULT_DENOMINATOR
        for _ in range(12):
            try:
                return (self._ket(w, p, lc, D), D)
            except Inexact as e:
                D *= e.den // gcd(D, e.den)
        raise OverflowError("no workable common denominator")

    cdef object _ket(self, w, p, lc, int64_t D):
        cdef int N = self.N, K = self.K, L = self.L
        cdef int r, i, gi, a, lp, n, j, err = 0
        cdef int64_t e, ci, fn, fd, x, bad = 1
        cdef bint any_nz
        cdef int64_t[:, :] vo
        cdef int64_t[:, :] vc
        cdef int64_t[:, :] vn
        gens = _ket_generators(w, p, lc, K, self.flux)
        cdef int ng = len(gens)
        cdef int64_t[:, :] G = gens_array(gens)
        out = np.zeros((N, L), dtype=np.int64)
        cur = np.zeros((N, L), dtype=np.int64)
        cur[0, 0] = D
        out[0, 0] = D
        vo = out
        for r in range(1, K + 1):
            vc = cur
            nxt = np.zeros((N, L), dtype=np.int64)
            vn = nxt
            any_nz = False
            with nogil:
                for i in range(N):
                    for a in range(L):
                        if vc[i, a]:
                            break
                    else:
                        continue
                    for gi in range(ng):
                        ci = G[gi, 0]
                        n = <int>G[gi, 1]
                        if self.wt[i] + n > K:
                            continue
                        lp = <int>G[gi, 4]
                        for e in range(self.ins_ptr[ci * N + i], self.ins_ptr[ci * N + i + 1]):
                            j = self.ins_col[e]
                            fn = self.ins_num[e] * G[gi, 2]
                            fd = self.ins_den[e] * G[gi, 3] * r
                            for a in range(L):
                                x = vc[i, a]
                                if not x:
                                    continue
                                if a + lp >= L:
                                    err = 3
                                    break
                                err = hdft_muldiv_add(&vn[j, a + lp], x, fn, fd)
                                if err:
                                    bad = fd
                                    break
                                any_nz = True
                            if err:
                                break
                        if err:
                            break
                    if err:
                        break
            _check(err, bad)
            if not any_nz:
                break
            self._accumulate(vo, vn)
            cur = nxt
        ops = [(i, w[i]) for i in range(3) if w[i]]
        if ops:
            self._exp_op(out, ops, 0, D)
            self._exp_op(out, ops, 1, D)
        return out

    cdef int _accumulate(self, int64_t[:, :] dst, int64_t[:, :] src) except -1:
        cdef int i, a, err = 0
        with nogil:
            for i in range(dst.shape[0]):
                for a in range(dst.shape[1]):
                    if src[i, a]:
                        err = hdft_add(&dst[i, a], src[i, a])
                        if err:
                            break
                if err:
                    break
        _check(err, 1)
        return 0

    cdef int _exp_op(self, out, ops, int which, int64_t D) except -1:
        # which = 0: l-weighted [Q_i, .] (log shift 1); which = 1: derivations D_j
        cdef int N = self.N, K = self.K, L = self.L
        cdef int64_t[:] ptr = self.qd_ptr if which == 0 else self.der_ptr
        cdef int32_t[:] col = self.qd_col if which == 0 else self.der_col
        cdef int64_t[:] num = self.qd_num if which == 0 else self.der_num
        cdef int64_t[:] den = self.qd_den if which == 0 else self.der_den
        cdef int lshift = 1 if which == 0 else 0
        cdef int nops = len(ops)
        cdef int64_t[:, :] O = np.array(ops, dtype=np.int64).reshape(nops, 2)
        cdef int64_t[:, :] vo = out
        cur = out.copy()
        cdef int64_t[:, :] vc
        cdef int64_t[:, :] vn
        cdef int r, i, oi, a, j, err = 0
        cdef int64_t e, row, x, fn, fd, bad = 1
        cdef bint any_nz
        for r in range(1, K + 2):
            vc = cur
            nxt = np.zeros((N, L), dtype=np.int64)
            vn = nxt
            any_nz = False
            with nogil:
                for i in range(N):
                    for oi in range(nops):
                        row = O[oi, 0] * N + i
                        for e in range(ptr[row], ptr[row + 1]):
                            j = col[e]
                            fn = num[e] * O[oi, 1]
                            fd = den[e] * r
                            for a in range(L):
                                x = vc[i, a]
                                if not x:
                                    continue
                                if a + lshift >= L:
                                    err = 3
                                    break
                                err = hdft_muldiv_add(&vn[j, a + lshift], x, fn, fd)
                                if err:
                                    bad = fd
                                    break
                                any_nz = True
                            if err:
                                break
                        if err:
                            break
                    if err:
                        break
            _check(err, bad)
            if not any_nz:
                break
            self._accumulate(vo, vn)
            cur = nxt
        return 0

    # ------------------------------------------------------------ bra side

    def phi(self, w, p, g):
        from ._engine import phi_scalars
        S, A = phi_scalars(self.K, w, p, g, self.flux)
        D = DEFAULT_DENOMINATOR
        for _ in range(12):
            try:
                return (self._phi(w, S, A, D), D)
            except Inexact as e:
                D *= e.den // gcd(D, e.den)
        raise OverflowError("no workable common denominator")

    cdef object _phi(self, w, S, A, int64_t D):
        cdef int N = self.N, K = self.K, L = self.L
        cdef int i, a, kind, j, m, rest, idx2, k, d, i2, err = 0
        cdef int64_t e, e2, fn, fd, x, row, bad = 1
        packed = _pack_phi_scalars(S, A, K)
        cdef int64_t[:] vs0n = packed[0]
        cdef int64_t[:] vs0d = packed[1]
        cdef int64_t[:] vs1n = packed[2]
        cdef int64_t[:] vs1d = packed[3]
        cdef int64_t[:] vaptr = packed[4]
        cdef int64_t[:] vak = packed[5]
        cdef int64_t[:] vad = packed[6]
        cdef int64_t[:] van = packed[7]
        cdef int64_t[:] vadn = packed[8]
        cdef int64_t[:] wv = np.array(w, dtype=np.int64)
        phi = np.zeros((N, L), dtype=np.int64)
        cdef int64_t[:, :] P = phi
        P[0, 0] = D
        with nogil:
            for i in range(1, N):
                kind = self.f_kind[i]
                j = self.f_j[i]
                m = self.f_m[i]
                rest = self.f_rest[i]
                if kind == 0:
                    if wv[j - 1]:
                        for a in range(L):
                            x = P[rest, a]
                            if x:
                                err = hdft_muldiv_add(&P[i, a], x, -wv[j - 1], m)
                                if err:
                                    bad = m
                                    break
                else:
                    idx2 = (j - 1) * K + m - 1
                    for a in range(L):
                        x = P[rest, a]
                        if not x:
                            continue
                        if vs0n[idx2]:
                            err = hdft_muldiv_add(&P[i, a], x, vs0n[idx2], vs0d[idx2])
                            if err:
                                bad = vs0d[idx2]
                                break
                        if vs1n[idx2]:
                            if a + 1 >= L:
                                err = 3
                                break
                            err = hdft_muldiv_add(&P[i, a + 1], x, vs1n[idx2], vs1d[idx2])
                            if err:
                                bad = vs1d[idx2]
                                break
                    if err:
                        break
                    for e in range(vaptr[idx2], vaptr[idx2 + 1]):
                        k = <int>vak[e]
                        d = <int>vad[e]
                        if d > self.wt[rest]:
                            continue
                        row = ((k - 1) * K + (d - 1)) * N + rest
                        for e2 in range(self.ann_ptr[row], self.ann_ptr[row + 1]):
                            i2 = self.ann_col[e2]
                            fn = van[e] * self.ann_num[e2]
                            fd = vadn[e] * self.ann_den[e2]
                            for a in range(L):
                                x = P[i2, a]
                                if x:
                                    err = hdft_muldiv_add(&P[i, a], x, fn, fd)
                                    if err:
                                        bad = fd
                                        break
                            if err:
                                break
                        if err:
                            break
                if err:
                    break
        _check(err, bad)
        return phi

    # ------------------------------------------------------------ pairing

    def dot(self, ket, phi):
        kt, Dk = ket
        pt, Dp = phi
        cdef int64_t[:, :] KV = kt
        cdef int64_t[:, :] PV = pt
        cdef int N = self.N, K = self.K, L = self.L
        acc_hi = np.zeros((K + 1) * L * L, dtype=np.int64)
        acc_lo = np.zeros((K + 1) * L * L, dtype=np.uint64)
        cdef int64_t[:] vhi = acc_hi
        cdef uint64_t[:] vlo = acc_lo
        cdef int i, a, b, wt, n, err = 0
        cdef int64_t kv
        n = (K + 1) * L * L
        cdef hdft_i128 *acc = <hdft_i128 *> malloc(n * sizeof(hdft_i128))
        if acc == NULL:
            raise MemoryError()
        with nogil:
            for i in range(n):
                acc[i] = 0
            for i in range(N):
                wt = self.wt[i]
                for b in range(L):
                    kv = KV[i, b]
                    if not kv:
                        continue
                    for a in range(L):
                        if PV[i, a]:
                            err = hdft_fma128(&acc[(wt * L + a) * L + b], PV[i, a], kv)
                            if err:
                                break
                    if err:
                        break
                if err:
                    break
            for i in range(n):
                vhi[i] = hdft_hi(acc[i])
                vlo[i] = hdft_lo(acc[i])
        free(acc)
        _check(err, 1)
        out = {}
        scale = Dk * Dp
        for wt in range(K + 1):
            for a in range(L):
                for b in range(L):
                    i = (wt * L + a) * L + b
                    v = (int(acc_hi[i]) << 64) + int(acc_lo[i])
                    if v:
                        out[(wt, a, b)] = Fraction(v, scale)
        return out
