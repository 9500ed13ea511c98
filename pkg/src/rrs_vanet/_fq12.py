"""Arithmetic in the BLS12-381 target field Fp12, used for GT elements.

The pairing backend computes pairings natively but exposes no way to rebuild
a GT element from bytes or raise one to a power, so GT lives here as plain
Python integers in the usual 2-over-3-over-2 tower:

    Fp2  = Fp[u]  / (u^2 + 1)
    Fp6  = Fp2[v] / (v^3 - (u + 1))
    Fp12 = Fp6[w] / (w^2 - v)

An Fp12 element is a flat 12-tuple of ints, coefficient order
``c0.c0.c0, c0.c0.c1, c0.c1.c0, ..., c1.c2.c1`` (the order used by the
backend's own serialization).
"""

from __future__ import annotations

from gmpy2 import mpz

P = mpz(0x1A0111EA397FE69A4B1BA7B6434BACD764774B84F38512BF6730D2A0F6B0F6241EABFFFEB153FFFFB9FEFFFFFFFFAAAB)
Q = mpz(0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001)

Fp12 = tuple  # 12 ints

ONE: Fp12 = (1,) + (0,) * 11


# -- Fp6 as flat 6-tuples (c0.re, c0.im, c1.re, c1.im, c2.re, c2.im) ---------
# Inputs may be unreduced non-negative or negative ints; outputs are reduced.


def _f6mul(a, b):
    a0r, a0i, a1r, a1i, a2r, a2i = a
    b0r, b0i, b1r, b1i, b2r, b2i = b
    t0 = a0r * b0r
    t1 = a0i * b0i
    v0r = t0 - t1
    v0i = (a0r + a0i) * (b0r + b0i) - t0 - t1
    t0 = a1r * b1r
    t1 = a1i * b1i
    v1r = t0 - t1
    v1i = (a1r + a1i) * (b1r + b1i) - t0 - t1
    t0 = a2r * b2r
    t1 = a2i * b2i
    v2r = t0 - t1
    v2i = (a2r + a2i) * (b2r + b2i) - t0 - t1

    xr = a1r + a2r
    xi = a1i + a2i
    yr = b1r + b2r
    yi = b1i + b2i
    t0 = xr * yr
    t1 = xi * yi
    dr = t0 - t1 - v1r - v2r
    di = (xr + xi) * (yr + yi) - t0 - t1 - v1i - v2i
    c0r = v0r + dr - di
    c0i = v0i + dr + di

    xr = a0r + a1r
    xi = a0i + a1i
    yr = b0r + b1r
    yi = b0i + b1i
    t0 = xr * yr
    t1 = xi * yi
    c1r = t0 - t1 - v0r - v1r + v2r - v2i
    c1i = (xr + xi) * (yr + yi) - t0 - t1 - v0i - v1i + v2r + v2i

    xr = a0r + a2r
    xi = a0i + a2i
    yr = b0r + b2r
    yi = b0i + b2i
    t0 = xr * yr
    t1 = xi * yi
    c2r = t0 - t1 - v0r - v2r + v1r
    c2i = (xr + xi) * (yr + yi) - t0 - t1 - v0i - v2i + v1i
    return (c0r % P, c0i % P, c1r % P, c1i % P, c2r % P, c2i % P)


def _f2mul(ar, ai, br, bi):
    t0 = ar * br
    t1 = ai * bi
    return (t0 - t1) % P, ((ar + ai) * (br + bi) - t0 - t1) % P


def _f2inv(ar, ai):
    n = pow(ar * ar + ai * ai, -1, P)
    return ar * n % P, (-ai) * n % P


def _f6inv(a):
    a0r, a0i, a1r, a1i, a2r, a2i = a
    # t0 = a0^2 - xi*a1*a2
    s0r, s0i = _f2mul(a0r, a0i, a0r, a0i)
    m12r, m12i = _f2mul(a1r, a1i, a2r, a2i)
    t0r, t0i = (s0r - (m12r - m12i)) % P, (s0i - (m12r + m12i)) % P
    # t1 = xi*a2^2 - a0*a1
    s2r, s2i = _f2mul(a2r, a2i, a2r, a2i)
    m01r, m01i = _f2mul(a0r, a0i, a1r, a1i)
    t1r, t1i = (s2r - s2i - m01r) % P, (s2r + s2i - m01i) % P
    # t2 = a1^2 - a0*a2
    s1r, s1i = _f2mul(a1r, a1i, a1r, a1i)
    m02r, m02i = _f2mul(a0r, a0i, a2r, a2i)
    t2r, t2i = (s1r - m02r) % P, (s1i - m02i) % P
    # d = a0*t0 + xi*(a2*t1 + a1*t2)
    ur, ui = _f2mul(a2r, a2i, t1r, t1i)
    wr, wi = _f2mul(a1r, a1i, t2r, t2i)
    er, ei = ur + wr, ui + wi
    fr, fi = _f2mul(a0r, a0i, t0r, t0i)
    dinv = _f2inv((fr + er - ei) % P, (fi + er + ei) % P)
    return (
        *_f2mul(t0r, t0i, *dinv),
        *_f2mul(t1r, t1i, *dinv),
        *_f2mul(t2r, t2i, *dinv),
    )


def _f6nr(t):
    # multiply by v: (c0, c1, c2) -> (xi*c2, c0, c1)
    return (t[4] - t[5], t[4] + t[5], t[0], t[1], t[2], t[3])


# -- Fp12 on flat 12-tuples ----------------------------------------------------


def _mul(a, b):
    A = a[:6]
    B = a[6:]
    C = b[:6]
    D = b[6:]
    t0 = _f6mul(A, C)
    t1 = _f6mul(B, D)
    s = _f6mul([x + y for x, y in zip(A, B)], [x + y for x, y in zip(C, D)])
    vt1 = _f6nr(t1)
    return tuple([(x + y) % P for x, y in zip(t0, vt1)] + [(x - y - z) % P for x, y, z in zip(s, t0, t1)])


def _sqr(a):
    A = a[:6]
    B = a[6:]
    t = _f6mul(A, B)
    s = _f6mul([x + y for x, y in zip(A, B)], [x + y for x, y in zip(A, _f6nr(B))])
    vt = _f6nr(t)
    return tuple([(x - y - z) % P for x, y, z in zip(s, t, vt)] + [2 * x % P for x in t])


def _conj(a):
    return a[:6] + tuple((-x) % P for x in a[6:])


def _cyclotomic_sqr(a):
    """Granger-Scott squaring, valid only for elements of the cyclotomic subgroup."""
    r0r, r0i, r4r, r4i, r3r, r3i, r2r, r2i, r1r, r1i, r5r, r5i = a

    # t0 + t1*y = (r0 + r1*y)^2, y^2 = xi
    tr = r0r * r1r
    ti = r0i * r1i
    mr = tr - ti
    mi = (r0r + r0i) * (r1r + r1i) - tr - ti
    xr = r0r + r1r
    xi = r0i + r1i
    yr = r1r - r1i + r0r
    yi = r1r + r1i + r0i
    tr = xr * yr
    ti = xi * yi
    t0r = tr - ti - mr - (mr - mi)
    t0i = (xr + xi) * (yr + yi) - tr - ti - mi - (mr + mi)
    t1r = 2 * mr
    t1i = 2 * mi

    tr = r2r * r3r
    ti = r2i * r3i
    mr = tr - ti
    mi = (r2r + r2i) * (r3r + r3i) - tr - ti
    xr = r2r + r3r
    xi = r2i + r3i
    yr = r3r - r3i + r2r
    yi = r3r + r3i + r2i
    tr = xr * yr
    ti = xi * yi
    t2r = tr - ti - mr - (mr - mi)
    t2i = (xr + xi) * (yr + yi) - tr - ti - mi - (mr + mi)
    t3r = 2 * mr
    t3i = 2 * mi

    tr = r4r * r5r
    ti = r4i * r5i
    mr = tr - ti
    mi = (r4r + r4i) * (r5r + r5i) - tr - ti
    xr = r4r + r5r
    xi = r4i + r5i
    yr = r5r - r5i + r4r
    yi = r5r + r5i + r4i
    tr = xr * yr
    ti = xi * yi
    t4r = tr - ti - mr - (mr - mi)
    t4i = (xr + xi) * (yr + yi) - tr - ti - mi - (mr + mi)
    t5r = 2 * mr
    t5i = 2 * mi

    nt5r = t5r - t5i
    nt5i = t5r + t5i
    return (
        (3 * t0r - 2 * r0r) % P,
        (3 * t0i - 2 * r0i) % P,
        (3 * t2r - 2 * r4r) % P,
        (3 * t2i - 2 * r4i) % P,
        (3 * t4r - 2 * r3r) % P,
        (3 * t4i - 2 * r3i) % P,
        (3 * nt5r + 2 * r2r) % P,
        (3 * nt5i + 2 * r2i) % P,
        (3 * t1r + 2 * r1r) % P,
        (3 * t1i + 2 * r1i) % P,
        (3 * t3r + 2 * r5r) % P,
        (3 * t3i + 2 * r5i) % P,
    )


def _inv(a):
    A = a[:6]
    B = a[6:]
    d = [(x - y) % P for x, y in zip(_f6mul(A, A), _f6nr(_f6mul(B, B)))]
    dinv = _f6inv(d)
    return _f6mul(A, dinv) + tuple((-x) % P for x in _f6mul(B, dinv))


def _wnaf(k: int, w: int) -> list[int]:
    digits = []
    half = 1 << (w - 1)
    full = 1 << w
    while k:
        if k & 1:
            d = k & (full - 1)
            if d >= half:
                d -= full
            k -= d
        else:
            d = 0
        digits.append(d)
        k >>= 1
    return digits


_WINDOW = 5


def _table(a):
    # odd powers a, a^3, ..., a^(2^(w-1) - 1)
    a2 = _cyclotomic_sqr(a)
    table = [a]
    for _ in range((1 << (_WINDOW - 2)) - 1):
        table.append(_mul(table[-1], a2))
    return table


# -- public API ----------------------------------------------------------------


def mul(a: Fp12, b: Fp12) -> Fp12:
    return _mul(a, b)


def sqr(a: Fp12) -> Fp12:
    return _sqr(a)


def cyclotomic_sqr(a: Fp12) -> Fp12:
    return _cyclotomic_sqr(a)


def inv(a: Fp12) -> Fp12:
    return _inv(a)


def conj(a: Fp12) -> Fp12:
    return _conj(a)


def pow_generic(a: Fp12, k: int) -> Fp12:
    """Square-and-multiply with generic squaring; valid for any nonzero element."""
    acc = ONE
    for bit in bin(k)[2:] if k > 0 else "":
        acc = _sqr(acc)
        if bit == "1":
            acc = _mul(acc, a)
    return acc


def multi_pow(pairs) -> Fp12:
    """prod(a^k) for (a, k) in pairs, all a in the order-Q subgroup."""
    plans = []
    longest = 0
    for a, k in pairs:
        k %= Q
        if k == 0:
            continue
        digits = _wnaf(k, _WINDOW)
        longest = max(longest, len(digits))
        plans.append((_table(a), digits))
    acc = None
    for i in range(longest - 1, -1, -1):
        if acc is not None:
            acc = _cyclotomic_sqr(acc)
        for table, digits in plans:
            if i < len(digits) and digits[i]:
                d = digits[i]
                t = table[abs(d) >> 1]
                if d < 0:
                    t = _conj(t)
                acc = t if acc is None else _mul(acc, t)
    return ONE if acc is None else acc


def gt_pow(a: Fp12, k: int) -> Fp12:
    """a^k for a in the order-Q subgroup (exponent taken mod Q)."""
    return multi_pow([(a, k)])


def in_subgroup(a: Fp12) -> bool:
    if all(c == 0 for c in a):
        return False
    return pow_generic(a, Q) == ONE
