# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tableau kernels (see _pykernels for the layout and op codes)."""
import numpy as np

from libc.stdint cimport uint64_t, uint8_t, int64_t


cdef extern from *:
    """
    static inline int eft_popcount(unsigned long long v) {
    #if defined(__GNUC__) || defined(__clang__)
        return __builtin_popcountll(v);
    #else
        int c = 0;
        while (v) { v &= v - 1; c++; }
        return c;
    #endif
    }
    """
    int eft_popcount(unsigned long long v) nogil


cdef inline void _h(uint64_t[:, ::1] x, uint64_t[:, ::1] z, uint8_t[::1] r,
                    Py_ssize_t q) noexcept nogil:
    cdef Py_ssize_t i, w = q >> 6
    cdef uint64_t m = (<uint64_t>1) << (q & 63)
    cdef uint64_t xb, zb
    for i in range(x.shape[0]):
        xb = x[i, w] & m
        zb = z[i, w] & m
        if xb and zb:
            r[i] ^= 1
        if (xb != 0) != (zb != 0):
            x[i, w] ^= m
            z[i, w] ^= m


cdef inline void _s(uint64_t[:, ::1] x, uint64_t[:, ::1] z, uint8_t[::1] r,
                    Py_ssize_t q, bint dag) noexcept nogil:
    cdef Py_ssize_t i, w = q >> 6
    cdef uint64_t m = (<uint64_t>1) << (q & 63)
    for i in range(x.shape[0]):
        if x[i, w] & m:
            if dag:
                if not (z[i, w] & m):
                    r[i] ^= 1
            elif z[i, w] & m:
                r[i] ^= 1
            z[i, w] ^= m


cdef inline void _pauli(uint64_t[:, ::1] x, uint64_t[:, ::1] z, uint8_t[::1] r,
                        Py_ssize_t q, int kind) noexcept nogil:
    # kind 3 X, 4 Y, 5 Z: sign flips on rows anticommuting with the Pauli
    cdef Py_ssize_t i, w = q >> 6
    cdef uint64_t m = (<uint64_t>1) << (q & 63)
    cdef int xb, zb
    for i in range(x.shape[0]):
        xb = (x[i, w] & m) != 0
        zb = (z[i, w] & m) != 0
        if kind == 3:
            r[i] ^= zb
        elif kind == 5:
            r[i] ^= xb
        else:
            r[i] ^= xb ^ zb


cdef inline void _cx(uint64_t[:, ::1] x, uint64_t[:, ::1] z, uint8_t[::1] r,
                     Py_ssize_t c, Py_ssize_t t) noexcept nogil:
    cdef Py_ssize_t i, wc = c >> 6, wt = t >> 6
    cdef uint64_t mc = (<uint64_t>1) << (c & 63)
    cdef uint64_t mt = (<uint64_t>1) << (t & 63)
    cdef int xc, zc, xt, zt
    for i in range(x.shape[0]):
        xc = (x[i, wc] & mc) != 0
        zc = (z[i, wc] & mc) != 0
        xt = (x[i, wt] & mt) != 0
        zt = (z[i, wt] & mt) != 0
        if xc and zt and not (xt ^ zc):
            r[i] ^= 1
        if xc:
            x[i, wt] ^= mt
        if zt:
            z[i, wc] ^= mc


def apply_h(uint64_t[:, ::1] x, uint64_t[:, ::1] z, uint8_t[::1] r, Py_ssize_t q):
    _h(x, z, r, q)


def apply_s(uint64_t[:, ::1] x, uint64_t[:, ::1] z, uint8_t[::1] r, Py_ssize_t q):
    _s(x, z, r, q, False)


def apply_sdg(uint64_t[:, ::1] x, uint64_t[:, ::1] z, uint8_t[::1] r, Py_ssize_t q):
    _s(x, z, r, q, True)


def apply_x(uint64_t[:, ::1] x, uint64_t[:, ::1] z, uint8_t[::1] r, Py_ssize_t q):
    _pauli(x, z, r, q, 3)


def apply_y(uint64_t[:, ::1] x, uint64_t[:, ::1] z, uint8_t[::1] r, Py_ssize_t q):
    _pauli(x, z, r, q, 4)


def apply_z(uint64_t[:, ::1] x, uint64_t[:, ::1] z, uint8_t[::1] r, Py_ssize_t q):
    _pauli(x, z, r, q, 5)


def apply_cx(uint64_t[:, ::1] x, uint64_t[:, ::1] z, uint8_t[::1] r,
             Py_ssize_t c, Py_ssize_t t):
    _cx(x, z, r, c, t)


def run(uint64_t[:, ::1] x, uint64_t[:, ::1] z, uint8_t[::1] r, int64_t[:, ::1] ops):
    cdef Py_ssize_t k
    cdef int64_t code
    with nogil:
        for k in range(ops.shape[0]):
            code = ops[k, 0]
            if code == 0:
                _h(x, z, r, ops[k, 1])
            elif code == 1:
                _s(x, z, r, ops[k, 1], False)
            elif code == 2:
                _s(x, z, r, ops[k, 1], True)
            elif code == 6:
                _cx(x, z, r, ops[k, 1], ops[k, 2])
            else:
                _pauli(x, z, r, ops[k, 1], <int>code)


cdef inline void _rowsum(uint64_t[:, ::1] x, uint64_t[:, ::1] z, uint8_t[::1] r,
                         Py_ssize_t h, Py_ssize_t i) noexcept nogil:
    cdef Py_ssize_t w
    cdef long e = 2 * r[h] + 2 * r[i]
    cdef uint64_t x1, z1, x2, z2, plus, minus
    for w in range(x.shape[1]):
        x1 = x[i, w]
        z1 = z[i, w]
        x2 = x[h, w]
        z2 = z[h, w]
        plus = (x1 & z1 & ~x2 & z2) | (x1 & ~z1 & x2 & z2) | (~x1 & z1 & x2 & ~z2)
        minus = (x1 & z1 & x2 & ~z2) | (x1 & ~z1 & ~x2 & z2) | (~x1 & z1 & x2 & z2)
        e += eft_popcount(plus) - eft_popcount(minus)
        x[h, w] = x2 ^ x1
        z[h, w] = z2 ^ z1
    e = ((e % 4) + 4) % 4
    r[h] = 1 if e == 2 else 0


def rowsum(uint64_t[:, ::1] x, uint64_t[:, ::1] z, uint8_t[::1] r,
           Py_ssize_t h, Py_ssize_t i):
    _rowsum(x, z, r, h, i)


cdef inline void _clear(uint64_t[:, ::1] x, uint64_t[:, ::1] z, uint8_t[::1] r,
                        Py_ssize_t s) noexcept nogil:
    cdef Py_ssize_t w
    for w in range(x.shape[1]):
        x[s, w] = 0
        z[s, w] = 0
    r[s] = 0


def measure(uint64_t[:, ::1] x, uint64_t[:, ::1] z, uint8_t[::1] r,
            Py_ssize_t n, Py_ssize_t q, int rbit):
    cdef Py_ssize_t i, w, p = -1, wq = q >> 6
    cdef uint64_t m = (<uint64_t>1) << (q & 63)
    for i in range(n, 2 * n):
        if x[i, wq] & m:
            p = i
            break
    if p >= 0:
        for i in range(2 * n):
            if i != p and (x[i, wq] & m):
                _rowsum(x, z, r, i, p)
        for w in range(x.shape[1]):
            x[p - n, w] = x[p, w]
            z[p - n, w] = z[p, w]
            x[p, w] = 0
            z[p, w] = 0
        r[p - n] = r[p]
        z[p, wq] = m
        r[p] = rbit
        return rbit
    _clear(x, z, r, 2 * n)
    for i in range(n):
        if x[i, wq] & m:
            _rowsum(x, z, r, 2 * n, i + n)
    return r[2 * n]


def expectation(uint64_t[:, ::1] x, uint64_t[:, ::1] z, uint8_t[::1] r,
                Py_ssize_t n, uint64_t[::1] ox, uint64_t[::1] oz):
    cdef Py_ssize_t i, w
    cdef int par
    for i in range(n, 2 * n):
        par = 0
        for w in range(x.shape[1]):
            par += eft_popcount((x[i, w] & oz[w]) ^ (z[i, w] & ox[w]))
        if par & 1:
            return 0
    _clear(x, z, r, 2 * n)
    for i in range(n):
        par = 0
        for w in range(x.shape[1]):
            par += eft_popcount((x[i, w] & oz[w]) ^ (z[i, w] & ox[w]))
        if par & 1:
            _rowsum(x, z, r, 2 * n, i + n)
    return -1 if r[2 * n] else 1
