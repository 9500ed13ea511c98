"""Shared test utilities: an independent Fp12 view via py_ecc and key fixtures."""

from __future__ import annotations

import functools

from py_ecc.fields import optimized_bls12_381_FQ12 as FQ12
from py_ecc.optimized_bls12_381 import field_modulus

from rrs_vanet import rrs


def to_pyecc(coeffs) -> FQ12:
    """Map a tower-ordered Fp12 tuple into py_ecc's single-extension basis.

    The tower has v = w^2 and u = w^6 - 1, so the Fp2 coefficient x + y*u at
    w^k becomes (x - y) at w^k plus y at w^(k+6). The map is a field
    isomorphism, which makes py_ecc an independent check on our arithmetic.
    """
    c = [0] * 12
    for a in range(2):
        for b in range(3):
            x = int(coeffs[6 * a + 2 * b])
            y = int(coeffs[6 * a + 2 * b + 1])
            k = a + 2 * b
            c[k] += x - y
            c[k + 6] += y
    return FQ12(c)


def compress_g1(x: int, y: int) -> bytes:
    """Zcash-style compressed encoding of an affine G1 curve point."""
    flags = 0x80
    if y > (field_modulus - 1) // 2:
        flags |= 0x20
    raw = bytearray(x.to_bytes(48, "big"))
    raw[0] |= flags
    return bytes(raw)


def point_outside_subgroup() -> tuple[int, int]:
    """An affine point on y^2 = x^3 + 4 over Fp that is not of order q."""
    from py_ecc.fields import optimized_bls12_381_FQ as FQ
    from py_ecc.optimized_bls12_381 import curve_order, is_inf, multiply

    p = field_modulus
    x = 1
    while True:
        rhs = (x**3 + 4) % p
        y = pow(rhs, (p + 1) // 4, p)
        if y * y % p == rhs:
            pt = (FQ(x), FQ(y), FQ(1))
            if not is_inf(multiply(pt, curve_order)):
                return x, y
        x += 1


@functools.lru_cache(maxsize=None)
def trc(seed: int = 2024) -> rrs.TrcKeyPair:
    return rrs.trc_keygen(seed)


@functools.lru_cache(maxsize=None)
def vehicle_keys(n: int, seed: int = 2024) -> tuple[rrs.VehicleKeyPair, ...]:
    authority = trc(seed)
    return tuple(rrs.derive_vehicle_key(authority.secret, f"veh-{seed}-{i}".encode()) for i in range(n))


def ring_of(keys) -> rrs.Ring:
    return rrs.Ring([k.public for k in keys])
