"""Revocable ring signatures with authority tracing.

A signer holding one secret key out of a ring of public keys proves, in one
Fiat-Shamir transcript, two statements bound to the same exponent:

* ``E = e(R, y_trc) ** x`` for the secret ``x`` (the tracing tag), and
* ``y_i = x * P`` for *some* ring member ``i`` (the 1-out-of-n proof).

Anyone holding the ring and the authority's public key ``y_trc`` can verify;
only the authority, using ``x_trc``, can find which member signed, by testing
``E == e(y_i, R) ** x_trc`` for each ``i``.

Indices are 0-based throughout this module.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import group
from .errors import (
    DuplicateRingMember,
    EmptyIdentity,
    EmptyRing,
    IndexMismatch,
    InvalidElement,
    InvalidSignature,
    LengthMismatch,
    NoSignerFound,
    NonCanonicalEncoding,
    SignerNotInRing,
    WrongLength,
)
from .group import ORDER, P, P_HAT, G1Point, G2Point, GtElement, RngLike

CHALLENGE_TAG = b"rrs/v1/chal"
VEHICLE_KEY_TAG = b"rrs/v1/vkey"
SIGNATURE_VERSION = 0x01


@dataclass(frozen=True)
class TrcKeyPair:
    secret: int
    public: G1Point

    def __repr__(self) -> str:
        return f"TrcKeyPair(public={self.public!r})"


@dataclass(frozen=True)
class VehicleKeyPair:
    secret: int
    public: G1Point

    def __repr__(self) -> str:
        return f"VehicleKeyPair(public={self.public!r})"

    def encode(self) -> bytes:
        """Key file form: version 0x01 ‖ secret scalar ‖ public key."""
        return bytes([SIGNATURE_VERSION]) + group.encode_scalar(self.secret) + self.public.encode()

    @classmethod
    def decode(cls, data: bytes) -> "VehicleKeyPair":
        data = bytes(data)
        if len(data) != 1 + group.SCALAR_LEN + group.G1_LEN:
            raise WrongLength("vehicle key file has the wrong length")
        if data[0] != SIGNATURE_VERSION:
            raise NonCanonicalEncoding(f"unknown key file version {data[0]:#x}")
        secret = group.decode_scalar(data[1 : 1 + group.SCALAR_LEN])
        public = G1Point.decode(data[1 + group.SCALAR_LEN :])
        if P * secret != public:
            raise InvalidElement("public key does not match the secret key")
        return cls(secret, public)


def trc_keygen(seed: RngLike = None) -> TrcKeyPair:
    rng = group.make_rng(seed)
    x = group.random_scalar(rng, nonzero=True)
    return TrcKeyPair(x, P * x)


def derive_vehicle_key(x_trc: int, rid: bytes) -> VehicleKeyPair:
    """Deterministic vehicle key ``x_i = H(x_trc, RID_i)``, ``y_i = x_i * P``."""
    if not rid:
        raise EmptyIdentity("real identity must be non-empty")
    data = group.encode_scalar(x_trc) + struct.pack(">I", len(rid)) + rid
    x = group.hash_to_scalar(VEHICLE_KEY_TAG, data)
    return VehicleKeyPair(x, P * x)


class Ring:
    """Ordered set of public keys, sorted by canonical encoding."""

    __slots__ = ("members", "_index")

    def __init__(self, keys: Iterable[G1Point]) -> None:
        members = sorted(keys)
        if not members:
            raise EmptyRing("a ring needs at least one member")
        for k in members:
            if not isinstance(k, G1Point):
                raise InvalidElement(f"ring members must be G1Point, got {type(k).__name__}")
        index = {k: i for i, k in enumerate(members)}
        if len(index) != len(members):
            raise DuplicateRingMember("ring contains a repeated public key")
        self.members: tuple[G1Point, ...] = tuple(members)
        self._index = index

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i: int) -> G1Point:
        return self.members[i]

    def __contains__(self, key) -> bool:
        return key in self._index

    def __eq__(self, other) -> bool:
        if not isinstance(other, Ring):
            return NotImplemented
        return self.members == other.members

    def __hash__(self) -> int:
        return hash(self.members)

    def __repr__(self) -> str:
        return f"Ring(n={len(self)})"

    def index_of(self, key: G1Point) -> int:
        try:
            return self._index[key]
        except KeyError:
            raise SignerNotInRing("public key is not a ring member") from None

    def encode(self) -> bytes:
        return struct.pack(">I", len(self.members)) + b"".join(k.encode() for k in self.members)

    @classmethod
    def decode_from(cls, data: bytes, offset: int = 0) -> tuple["Ring", int]:
        """Parse a ring at ``offset``; returns the ring and the offset past it."""
        if len(data) < offset + 4:
            raise WrongLength("truncated ring header")
        (n,) = struct.unpack_from(">I", data, offset)
        offset += 4
        end = offset + n * group.G1_LEN
        if n == 0:
            raise EmptyRing("encoded ring is empty")
        if len(data) < end:
            raise WrongLength("truncated ring body")
        keys = [G1Point.decode(data[offset + i * group.G1_LEN : offset + (i + 1) * group.G1_LEN]) for i in range(n)]
        if any(a.encode() >= b.encode() for a, b in zip(keys, keys[1:])):
            raise NonCanonicalEncoding("ring members must be strictly ascending")
        return cls(keys), end

    @classmethod
    def decode(cls, data: bytes) -> "Ring":
        ring, end = cls.decode_from(data)
        if end != len(data):
            raise WrongLength("trailing bytes after ring")
        return ring


@dataclass(frozen=True)
class RingSignature:
    R: G2Point
    E_trc: GtElement
    s: int
    s_list: tuple[int, ...]
    c_list: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.s_list) != len(self.c_list):
            raise LengthMismatch("s_list and c_list differ in length")

    @property
    def n(self) -> int:
        return len(self.s_list)

    def encode(self) -> bytes:
        parts = [
            bytes([SIGNATURE_VERSION]),
            struct.pack(">I", self.n),
            self.R.encode(),
            self.E_trc.encode(),
            group.encode_scalar(self.s),
        ]
        parts += [group.encode_scalar(v) for v in self.s_list]
        parts += [group.encode_scalar(v) for v in self.c_list]
        return b"".join(parts)

    @staticmethod
    def encoded_len(n: int) -> int:
        return 1 + 4 + group.G2_LEN + group.GT_LEN + group.SCALAR_LEN * (1 + 2 * n)

    @classmethod
    def decode_from(cls, data: bytes, offset: int = 0) -> tuple["RingSignature", int]:
        if len(data) < offset + 5:
            raise WrongLength("truncated signature header")
        if data[offset] != SIGNATURE_VERSION:
            raise NonCanonicalEncoding(f"unknown signature version {data[offset]:#x}")
        (n,) = struct.unpack_from(">I", data, offset + 1)
        end = offset + cls.encoded_len(n)
        if len(data) < end:
            raise WrongLength("truncated signature body")
        pos = offset + 5
        R = G2Point.decode(data[pos : pos + group.G2_LEN])
        pos += group.G2_LEN
        E = GtElement.decode(data[pos : pos + group.GT_LEN])
        pos += group.GT_LEN
        scalars = [
            group.decode_scalar(data[pos + i * group.SCALAR_LEN : pos + (i + 1) * group.SCALAR_LEN])
            for i in range(1 + 2 * n)
        ]
        return cls(R, E, scalars[0], tuple(scalars[1 : 1 + n]), tuple(scalars[1 + n :])), end

    @classmethod
    def decode(cls, data: bytes) -> "RingSignature":
        sig, end = cls.decode_from(data)
        if end != len(data):
            raise WrongLength("trailing bytes after signature")
        return sig


@dataclass(frozen=True)
class SigningNonces:
    """Ephemeral values of one signing run, exposed only for white-box tests."""

    r: int
    l1: int
    l2: int
    c: int
    signer_index: int


def _challenge(
    ring: Ring,
    y_trc: G1Point,
    R: G2Point,
    E_trc: GtElement,
    commitment: GtElement,
    points: Sequence[G1Point],
    message: bytes,
) -> int:
    data = b"".join(
        [
            ring.encode(),
            y_trc.encode(),
            R.encode(),
            E_trc.encode(),
            commitment.encode(),
            *(a.encode() for a in points),
            struct.pack(">I", len(message)),
            message,
        ]
    )
    return group.hash_to_scalar(CHALLENGE_TAG, data)


def sign_with_nonces(
    ring: Ring,
    signer: VehicleKeyPair,
    signer_index: int,
    y_trc: G1Point,
    message: bytes,
    seed: RngLike = None,
) -> tuple[RingSignature, SigningNonces]:
    """Like :func:`sign`, but also return the ephemeral signing values."""
    n = len(ring)
    if signer.public not in ring:
        raise SignerNotInRing("signer's public key is not in the ring")
    if not 0 <= signer_index < n or ring[signer_index] != signer.public:
        raise IndexMismatch(f"ring member {signer_index} is not the signer's public key")
    rng = group.make_rng(seed)
    x = signer.secret
    pi = signer_index

    r = group.random_scalar(rng, nonzero=True)
    l1 = group.random_scalar(rng)
    l2 = group.random_scalar(rng)
    R = P_HAT * r
    # one pairing serves both the tracing tag and the commitment
    e0 = group.pairing(R, y_trc)
    E_trc = group.gt_pow(e0, x)
    commitment = group.gt_pow(e0, l1)

    s_list = [0] * n
    c_list = [0] * n
    points: list[G1Point] = [None] * n  # type: ignore[list-item]
    for i in range(n):
        if i == pi:
            points[i] = P * l2
            continue
        s_list[i] = group.random_scalar(rng)
        c_list[i] = group.random_scalar(rng)
        points[i] = P * s_list[i] + ring[i] * c_list[i]

    c = _challenge(ring, y_trc, R, E_trc, commitment, points, message)
    s = (l1 - c * x) % ORDER
    c_list[pi] = (c - sum(c_list)) % ORDER
    s_list[pi] = (l2 - c_list[pi] * x) % ORDER

    sig = RingSignature(R, E_trc, s, tuple(s_list), tuple(c_list))
    return sig, SigningNonces(r, l1, l2, c, pi)


def sign(
    ring: Ring,
    signer: VehicleKeyPair,
    signer_index: int,
    y_trc: G1Point,
    message: bytes,
    seed: RngLike = None,
) -> RingSignature:
    """Sign ``message`` on behalf of ``ring``; ``seed=None`` uses the OS CSPRNG."""
    return sign_with_nonces(ring, signer, signer_index, y_trc, message, seed)[0]


def verify(ring: Ring, y_trc: G1Point, message: bytes, sig: RingSignature) -> bool:
    """Scheme-level verification; raises only on a structural length mismatch."""
    n = len(ring)
    if sig.n != n:
        raise LengthMismatch(f"signature covers {sig.n} members, ring has {n}")
    scalars = (sig.s, *sig.s_list, *sig.c_list)
    if any(not 0 <= v < ORDER for v in scalars):
        return False
    if not (isinstance(sig.R, G2Point) and isinstance(sig.E_trc, GtElement)):
        return False

    c_sum = sum(sig.c_list) % ORDER
    e0 = group.pairing(sig.R, y_trc)
    commitment = group.gt_pow(e0, sig.s) * group.gt_pow(sig.E_trc, c_sum)
    points = [P * s_i + y_i * c_i for s_i, c_i, y_i in zip(sig.s_list, sig.c_list, ring)]
    return _challenge(ring, y_trc, sig.R, sig.E_trc, commitment, points, message) == c_sum


def _trace_candidates(sig: RingSignature, ring: Ring, x_trc: int):
    # e(y_i, R) ** x_trc == e(y_i, x_trc * R): one G2 mul instead of n GT exps
    blinded = sig.R * x_trc
    for i, y in enumerate(ring):
        yield i, group.pairing(y, blinded) == sig.E_trc


def trace(
    sig: RingSignature,
    ring: Ring,
    x_trc: int,
    message: bytes | None = None,
    strategy: str = "early-exit",
) -> int:
    """Index of the actual signer, found with the authority's secret key.

    When ``message`` is given the signature is re-verified under this
    authority's key first (:class:`InvalidSignature` on failure); pass
    ``None`` only for a signature the caller has already verified.

    ``strategy`` is ``"early-exit"`` (stop at the first match) or
    ``"linear"`` (test every member, return the lowest matching index).
    """
    if sig.n != len(ring):
        raise InvalidSignature(f"signature covers {sig.n} members, ring has {len(ring)}")
    if message is not None and not verify(ring, P * x_trc, message, sig):
        raise InvalidSignature("signature does not verify under this authority key")
    if strategy == "early-exit":
        for i, hit in _trace_candidates(sig, ring, x_trc):
            if hit:
                return i
    elif strategy == "linear":
        hits = [i for i, hit in _trace_candidates(sig, ring, x_trc) if hit]
        if hits:
            return hits[0]
    else:
        raise ValueError(f"unknown trace strategy {strategy!r}")
    raise NoSignerFound("no ring member matches the tracing tag")
