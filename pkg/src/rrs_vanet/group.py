"""Bilinear group over BLS12-381 with a symmetric-pairing facade.

The protocol is written for a symmetric pairing e: G1 x G1 -> GT. BLS12-381
only has an asymmetric one, e: G1 x G2 -> GT, so every protocol element that
ever appears as a pairing argument opposite another G1 element is kept in G2
instead (the signature commitment R). ``pairing`` accepts its two arguments in
either order as long as one lives in G1 and the other in G2.

G1/G2 arithmetic and the pairing itself come from ``py_arkworks_bls12381``;
GT arithmetic and GT (de)serialization live in :mod:`rrs_vanet._fq12`.

Every public group operation reports to the active :class:`OpCounter` scopes,
which is how the operation-count audits observe the scheme.
"""

from __future__ import annotations

import contextlib
import hashlib
import random
import secrets
import struct
from contextvars import ContextVar
from dataclasses import dataclass, fields
from typing import Iterator, Union

import py_arkworks_bls12381 as _ark
from gmpy2 import mpz

from . import _fq12
from .errors import InvalidElement, NonCanonicalEncoding, NotInSubgroup, WrongLength

ORDER = int(_fq12.Q)
FIELD_MODULUS = int(_fq12.P)

SCALAR_LEN = 32
G1_LEN = 48
G2_LEN = 96
GT_LEN = 12 * 48

RngLike = Union[int, random.Random, None]


# -- operation counting --------------------------------------------------------


@dataclass
class OpCounter:
    """Tally of expensive group operations observed inside a counting scope.

    G2 scalar multiplications are tallied apart from G1 ones; in the
    symmetric model both are multiplications in the single source group.
    """

    n_pairings: int = 0
    n_g1_muls: int = 0
    n_g2_muls: int = 0
    n_gt_exps: int = 0
    n_hashes: int = 0

    @property
    def n_source_muls(self) -> int:
        return self.n_g1_muls + self.n_g2_muls

    def reset(self) -> None:
        for f in fields(self):
            setattr(self, f.name, 0)

    def as_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_active_counters: ContextVar[tuple[OpCounter, ...]] = ContextVar("_active_counters", default=())


@contextlib.contextmanager
def count_ops() -> Iterator[OpCounter]:
    """Count group operations performed inside the ``with`` block.

    Scopes nest; an operation is added to every enclosing scope.
    """
    counter = OpCounter()
    token = _active_counters.set(_active_counters.get() + (counter,))
    try:
        yield counter
    finally:
        _active_counters.reset(token)


def _bump(name: str, k: int = 1) -> None:
    for c in _active_counters.get():
        setattr(c, name, getattr(c, name) + k)


# -- randomness ----------------------------------------------------------------


def make_rng(seed: RngLike = None) -> random.Random:
    """Seeded ``random.Random`` for an int, the OS CSPRNG for ``None``."""
    if seed is None:
        return secrets.SystemRandom()
    if isinstance(seed, random.Random):
        return seed
    return random.Random(seed)


def random_scalar(rng: random.Random, nonzero: bool = False) -> int:
    if nonzero:
        return rng.randrange(1, ORDER)
    return rng.randrange(ORDER)


# -- source-group points ------------------------------------------------------


class _SourcePoint:
    __slots__ = ("_raw", "_enc")

    _ark_type: type
    _enc_len: int
    _mul_counter: str

    def __init__(self, raw) -> None:
        self._raw = raw
        self._enc = bytes(raw.to_compressed_bytes())

    @classmethod
    def generator(cls):
        return cls(cls._ark_type())

    @classmethod
    def identity(cls):
        return cls(cls._ark_type.identity())

    def is_identity(self) -> bool:
        return self._enc[0] & 0x40 != 0

    def encode(self) -> bytes:
        return self._enc

    @classmethod
    def decode(cls, data: bytes):
        data = bytes(data)
        if len(data) != cls._enc_len:
            raise WrongLength(f"{cls.__name__} encoding must be {cls._enc_len} bytes, got {len(data)}")
        try:
            raw = cls._ark_type.from_compressed_bytes(data)
        except ValueError:
            try:
                cls._ark_type.from_compressed_bytes_unchecked(data)
            except ValueError as exc:
                raise NonCanonicalEncoding(f"not a valid compressed {cls.__name__}") from exc
            raise NotInSubgroup(f"point is on the curve but outside the order-q subgroup") from None
        point = cls(raw)
        # the backend ignores trailing bits after the infinity flag
        if point._enc != data:
            raise NonCanonicalEncoding(f"non-canonical {cls.__name__} encoding")
        return point

    def __add__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return type(self)(self._raw + other._raw)

    def __sub__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return type(self)(self._raw - other._raw)

    def __neg__(self):
        return type(self)(-self._raw)

    def __mul__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        _bump(self._mul_counter)
        return type(self)(self._raw * _ark.Scalar(k % ORDER))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return self._enc == other._enc

    def __lt__(self, other) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return self._enc < other._enc

    def __hash__(self) -> int:
        return hash((type(self).__name__, self._enc))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self._enc.hex()[:16]}...)"


class G1Point(_SourcePoint):
    """Point of the prime-order subgroup of E(Fp); 48-byte compressed encoding."""

    __slots__ = ()
    _ark_type = _ark.G1Point
    _enc_len = G1_LEN
    _mul_counter = "n_g1_muls"


class G2Point(_SourcePoint):
    """Point of the prime-order subgroup of E'(Fp2); 96-byte compressed encoding."""

    __slots__ = ()
    _ark_type = _ark.G2Point
    _enc_len = G2_LEN
    _mul_counter = "n_g2_muls"


# -- target group ----------------------------------------------------------------


class GtElement:
    """Element of the order-q subgroup of Fp12*, written multiplicatively.

    Encoding: the twelve tower coefficients, each 48 bytes big-endian.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs) -> None:
        self._c = tuple(mpz(c) for c in coeffs)

    @classmethod
    def one(cls) -> "GtElement":
        return cls(_fq12.ONE)

    @classmethod
    def _from_backend(cls, raw) -> "GtElement":
        b = bytes.fromhex(str(raw))
        return cls(int.from_bytes(b[48 * i : 48 * i + 48], "little") for i in range(12))

    def is_one(self) -> bool:
        return self._c == _fq12.ONE

    def encode(self) -> bytes:
        return b"".join(int(c).to_bytes(48, "big") for c in self._c)

    @classmethod
    def decode(cls, data: bytes) -> "GtElement":
        data = bytes(data)
        if len(data) != GT_LEN:
            raise WrongLength(f"GT encoding must be {GT_LEN} bytes, got {len(data)}")
        coeffs = [int.from_bytes(data[48 * i : 48 * i + 48], "big") for i in range(12)]
        if any(c >= FIELD_MODULUS for c in coeffs):
            raise NonCanonicalEncoding("GT coefficient not reduced mod p")
        elem = cls(coeffs)
        if not _fq12.in_subgroup(elem._c):
            raise NotInSubgroup("element is not in the order-q subgroup of Fp12*")
        return elem

    def __mul__(self, other):
        if not isinstance(other, GtElement):
            return NotImplemented
        return gt_mul(self, other)

    def __pow__(self, k: int) -> "GtElement":
        return gt_pow(self, k)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GtElement):
            return NotImplemented
        return self._c == other._c

    def __hash__(self) -> int:
        return hash(self._c)

    def __repr__(self) -> str:
        return f"GtElement({self.encode().hex()[:16]}...)"


# -- parameters --------------------------------------------------------------


@dataclass(frozen=True)
class GroupParams:
    q: int
    P: G1Point
    P_hat: G2Point
    enc_len_g1: int = G1_LEN
    enc_len_g2: int = G2_LEN
    enc_len_gt: int = GT_LEN
    enc_len_scalar: int = SCALAR_LEN


PARAMS = GroupParams(q=ORDER, P=G1Point.generator(), P_hat=G2Point.generator())
P = PARAMS.P
P_HAT = PARAMS.P_hat


# -- counted operations --------------------------------------------------------


def pairing(a: _SourcePoint, b: _SourcePoint) -> GtElement:
    """Symmetric-style pairing: one argument in G1, the other in G2, any order."""
    if isinstance(a, G2Point) and isinstance(b, G1Point):
        a, b = b, a
    if not (isinstance(a, G1Point) and isinstance(b, G2Point)):
        raise InvalidElement(
            f"pairing needs one G1 and one G2 argument, got {type(a).__name__} and {type(b).__name__}"
        )
    _bump("n_pairings")
    return GtElement._from_backend(_ark.GT.pairing(a._raw, b._raw))


def g1_scalar_mul(p: G1Point, k: int) -> G1Point:
    if not isinstance(p, G1Point):
        raise InvalidElement(f"expected G1Point, got {type(p).__name__}")
    return p * k


def g2_scalar_mul(p: G2Point, k: int) -> G2Point:
    if not isinstance(p, G2Point):
        raise InvalidElement(f"expected G2Point, got {type(p).__name__}")
    return p * k


def g1_add(p: G1Point, q: G1Point) -> G1Point:
    if not (isinstance(p, G1Point) and isinstance(q, G1Point)):
        raise InvalidElement("g1_add expects two G1Point values")
    return p + q


def gt_pow(e: GtElement, k: int) -> GtElement:
    if not isinstance(e, GtElement):
        raise InvalidElement(f"expected GtElement, got {type(e).__name__}")
    _bump("n_gt_exps")
    return GtElement(_fq12.gt_pow(e._c, k % ORDER))


def gt_mul(e: GtElement, f: GtElement) -> GtElement:
    if not (isinstance(e, GtElement) and isinstance(f, GtElement)):
        raise InvalidElement("gt_mul expects two GtElement values")
    return GtElement(_fq12.mul(e._c, f._c))


def hash_to_scalar(domain_tag: bytes, data: bytes) -> int:
    """SHA-512 of ``tag || len(data) (4 bytes BE) || data``, reduced mod q."""
    _bump("n_hashes")
    h = hashlib.sha512()
    h.update(domain_tag)
    h.update(struct.pack(">I", len(data)))
    h.update(data)
    return int.from_bytes(h.digest(), "big") % ORDER


# -- scalars and generic encode/decode ------------------------------------------


def encode_scalar(k: int) -> bytes:
    if not 0 <= k < ORDER:
        raise InvalidElement("scalar out of range [0, q)")
    return k.to_bytes(SCALAR_LEN, "big")


def decode_scalar(data: bytes) -> int:
    if len(data) != SCALAR_LEN:
        raise WrongLength(f"scalar encoding must be {SCALAR_LEN} bytes, got {len(data)}")
    k = int.from_bytes(data, "big")
    if k >= ORDER:
        raise NonCanonicalEncoding("scalar not reduced mod q")
    return k


_DECODERS = {
    "scalar": decode_scalar,
    "g1": G1Point.decode,
    "g2": G2Point.decode,
    "gt": GtElement.decode,
}


def canonical_encode(x) -> bytes:
    if isinstance(x, bool):
        raise InvalidElement("bool is not a scalar")
    if isinstance(x, int):
        return encode_scalar(x)
    if isinstance(x, (_SourcePoint, GtElement)):
        return x.encode()
    raise InvalidElement(f"cannot encode {type(x).__name__}")


def canonical_decode(data: bytes, kind: str):
    """Decode ``data`` as one of ``"scalar"``, ``"g1"``, ``"g2"``, ``"gt"``."""
    try:
        decoder = _DECODERS[kind]
    except KeyError:
        raise ValueError(f"unknown element kind {kind!r}") from None
    return decoder(data)
