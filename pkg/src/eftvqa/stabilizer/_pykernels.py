"""Pure numpy tableau kernels; same signatures as the compiled ``_kernels``.

Tableau layout: ``x``/``z`` are uint64 arrays of shape (2n + 1, W) with qubit j
at bit j % 64 of word j // 64; rows 0..n-1 are destabilizers, n..2n-1
stabilizers, row 2n is scratch.  ``r`` holds phase bits (0 -> +, 1 -> -).
(x, z) = (1, 1) denotes Y.

Op codes for ``run``: 0 H, 1 S, 2 Sdg, 3 X, 4 Y, 5 Z, 6 CX.
"""
import numpy as np

ONE = np.uint64(1)

if hasattr(np, "bitwise_count"):
    def _popcount(a):
        return np.bitwise_count(a)
else:  # pragma: no cover - numpy < 2
    _M1 = np.uint64(0x5555555555555555)
    _M2 = np.uint64(0x3333333333333333)
    _M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
    _H01 = np.uint64(0x0101010101010101)

    def _popcount(a):
        a = a - ((a >> ONE) & _M1)
        a = (a & _M2) + ((a >> np.uint64(2)) & _M2)
        a = (a + (a >> np.uint64(4))) & _M4
        return (a * _H01) >> np.uint64(56)


def _bits(a, q):
    return (a[:, q >> 6] >> np.uint64(q & 63)) & ONE


def apply_h(x, z, r, q):
    w, m = q >> 6, ONE << np.uint64(q & 63)
    xb, zb = _bits(x, q), _bits(z, q)
    r ^= (xb & zb).astype(np.uint8)
    flip = (xb ^ zb) * m
    x[:, w] ^= flip
    z[:, w] ^= flip


def apply_s(x, z, r, q):
    w = q >> 6
    xb, zb = _bits(x, q), _bits(z, q)
    r ^= (xb & zb).astype(np.uint8)
    z[:, w] ^= xb << np.uint64(q & 63)


def apply_sdg(x, z, r, q):
    w = q >> 6
    xb, zb = _bits(x, q), _bits(z, q)
    r ^= (xb & (zb ^ ONE)).astype(np.uint8)
    z[:, w] ^= xb << np.uint64(q & 63)


def apply_x(x, z, r, q):
    r ^= _bits(z, q).astype(np.uint8)


def apply_y(x, z, r, q):
    r ^= (_bits(x, q) ^ _bits(z, q)).astype(np.uint8)


def apply_z(x, z, r, q):
    r ^= _bits(x, q).astype(np.uint8)


def apply_cx(x, z, r, c, t):
    xc, zc = _bits(x, c), _bits(z, c)
    xt, zt = _bits(x, t), _bits(z, t)
    r ^= (xc & zt & (xt ^ zc ^ ONE)).astype(np.uint8)
    x[:, t >> 6] ^= xc << np.uint64(t & 63)
    z[:, c >> 6] ^= zt << np.uint64(c & 63)


_DISPATCH = (apply_h, apply_s, apply_sdg, apply_x, apply_y, apply_z)


def run(x, z, r, ops):
    for code, a, b in ops:
        if code == 6:
            apply_cx(x, z, r, int(a), int(b))
        else:
            _DISPATCH[code](x, z, r, int(a))


def _g_sum(x1, z1, x2, z2):
    """Sum over qubits of the AG phase exponent g(x1, z1, x2, z2), packed."""
    nx1, nz1, nx2, nz2 = ~x1, ~z1, ~x2, ~z2
    plus = (x1 & z1 & nx2 & z2) | (x1 & nz1 & x2 & z2) | (nx1 & z1 & x2 & nz2)
    minus = (x1 & z1 & x2 & nz2) | (x1 & nz1 & nx2 & z2) | (nx1 & z1 & x2 & z2)
    return int(_popcount(plus).sum()) - int(_popcount(minus).sum())


def rowsum(x, z, r, h, i):
    """Row h <- row i * row h (phases tracked exactly)."""
    e = 2 * int(r[h]) + 2 * int(r[i]) + _g_sum(x[i], z[i], x[h], z[h])
    r[h] = (e % 4) // 2
    x[h] ^= x[i]
    z[h] ^= z[i]


def _anticommutes(xa, za, xb, zb):
    return int(_popcount((xa & zb) ^ (za & xb)).sum()) & 1


def measure(x, z, r, n, q, rbit):
    """Z measurement of qubit q; ``rbit`` is used when the outcome is random."""
    w, m = q >> 6, ONE << np.uint64(q & 63)
    stab_hits = np.nonzero(x[n:2 * n, w] & m)[0]
    if stab_hits.size:
        p = n + int(stab_hits[0])
        for i in range(2 * n):
            if i != p and (x[i, w] & m):
                rowsum(x, z, r, i, p)
        x[p - n] = x[p]
        z[p - n] = z[p]
        r[p - n] = r[p]
        x[p] = 0
        z[p] = 0
        z[p, w] = m
        r[p] = rbit
        return int(rbit)
    s = 2 * n
    x[s] = 0
    z[s] = 0
    r[s] = 0
    for i in np.nonzero(x[:n, w] & m)[0]:
        rowsum(x, z, r, s, int(i) + n)
    return int(r[s])


def expectation(x, z, r, n, ox, oz):
    """<P> for the Pauli with packed bits (ox, oz): +1, -1 or 0."""
    sx, sz = x[n:2 * n], z[n:2 * n]
    anti = _popcount((sx & oz) ^ (sz & ox)).sum(axis=1) & 1
    if anti.any():
        return 0
    s = 2 * n
    x[s] = 0
    z[s] = 0
    r[s] = 0
    dx, dz = x[:n], z[:n]
    hits = np.nonzero(_popcount((dx & oz) ^ (dz & ox)).sum(axis=1) & 1)[0]
    for i in hits:
        rowsum(x, z, r, s, int(i) + n)
    return -1 if r[s] else 1
