"""The Transportation Regulation Center (TRC).

Registers vehicles, keeps the ``(y_i, RID_i)`` records, traces disputed
envelopes back to a real identity and issues revocations.
"""

from __future__ import annotations

import bisect
import struct
import threading
from dataclasses import dataclass, field
from pathlib import Path

from . import group, rrs
from .errors import (
    AlreadyRevoked,
    DuplicateIdentity,
    NonCanonicalEncoding,
    UnregisteredKey,
    WrongLength,
)
from .group import G1Point, RngLike
from .messages import SignedEnvelope
from .rrs import TrcKeyPair, VehicleKeyPair

SNAPSHOT_VERSION = 0x01
SECRET_KEY_VERSION = 0x01


@dataclass(frozen=True)
class RegistrationRecord:
    y: G1Point
    rid: bytes


@dataclass(frozen=True)
class RevocationBroadcast:
    epoch: int
    y: G1Point
    rid: bytes

    def encode(self) -> bytes:
        return struct.pack(">I", self.epoch) + self.y.encode() + struct.pack(">H", len(self.rid)) + self.rid

    @classmethod
    def decode(cls, data: bytes) -> "RevocationBroadcast":
        data = bytes(data)
        head = 4 + group.G1_LEN + 2
        if len(data) < head:
            raise WrongLength("truncated revocation broadcast")
        (epoch,) = struct.unpack_from(">I", data, 0)
        y = G1Point.decode(data[4 : 4 + group.G1_LEN])
        (rid_len,) = struct.unpack_from(">H", data, 4 + group.G1_LEN)
        if len(data) != head + rid_len:
            raise WrongLength("revocation broadcast length does not match its RID length")
        return cls(epoch, y, data[head:])


@dataclass
class RevocationList:
    """Append-only list of revoked public keys; ``epoch`` counts revocations."""

    epoch: int = 0
    entries: list[G1Point] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._members = set(self.entries)
        if len(self._members) != len(self.entries):
            raise ValueError("revocation list entries must be distinct")

    def __contains__(self, y) -> bool:
        return y in self._members

    def __len__(self) -> int:
        return len(self.entries)

    def add(self, y: G1Point, epoch: int | None = None) -> None:
        if y in self._members:
            raise AlreadyRevoked("key is already on the revocation list")
        self.entries.append(y)
        self._members.add(y)
        self.epoch = self.epoch + 1 if epoch is None else epoch

    def intersects(self, keys) -> bool:
        return any(k in self._members for k in keys)

    def copy(self) -> "RevocationList":
        return RevocationList(self.epoch, list(self.entries))


class TrcState:
    """Authority state: keypair, sorted registration records, revocation list.

    Mutations (registration, revocation) are serialized by a lock; lookups and
    traces only read.
    """

    def __init__(self, keypair: TrcKeyPair, records=(), rl: RevocationList | None = None) -> None:
        self.keypair = keypair
        self.rl = rl if rl is not None else RevocationList()
        self._keys: list[bytes] = []
        self._records: list[RegistrationRecord] = []
        self._rids: set[bytes] = set()
        self._lock = threading.Lock()
        for rec in records:
            self._insert(rec)

    @classmethod
    def create(cls, seed: RngLike = None) -> "TrcState":
        return cls(rrs.trc_keygen(seed))

    @property
    def public_key(self) -> G1Point:
        return self.keypair.public

    @property
    def records(self) -> tuple[RegistrationRecord, ...]:
        return tuple(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def _insert(self, rec: RegistrationRecord) -> None:
        if rec.rid in self._rids:
            raise DuplicateIdentity(f"RID {rec.rid!r} is already registered")
        key = rec.y.encode()
        i = bisect.bisect_left(self._keys, key)
        if i < len(self._keys) and self._keys[i] == key:
            raise DuplicateIdentity("public key already registered")
        self._keys.insert(i, key)
        self._records.insert(i, rec)
        self._rids.add(rec.rid)

    def register_vehicle(self, rid: bytes) -> VehicleKeyPair:
        keypair = rrs.derive_vehicle_key(self.keypair.secret, rid)
        with self._lock:
            self._insert(RegistrationRecord(keypair.public, bytes(rid)))
        return keypair

    def lookup_identity(self, y: G1Point, search: str = "binary") -> bytes:
        key = y.encode()
        if search == "binary":
            i = bisect.bisect_left(self._keys, key)
            if i < len(self._keys) and self._keys[i] == key:
                return self._records[i].rid
        elif search == "linear":
            for rec in self._records:
                if rec.y == y:
                    return rec.rid
        else:
            raise ValueError(f"unknown search strategy {search!r}")
        raise UnregisteredKey("public key has no registration record")

    def trace_to_identity(self, envelope: SignedEnvelope, search: str = "binary") -> tuple[G1Point, bytes]:
        """Find the signer of ``envelope`` and its real identity.

        Needs nothing beyond the envelope and this state; the signer takes no
        part in tracing.
        """
        index = rrs.trace(envelope.signature, envelope.ring, self.keypair.secret, envelope.message)
        y = envelope.ring[index]
        return y, self.lookup_identity(y, search)

    def revoke(self, y: G1Point) -> RevocationBroadcast:
        with self._lock:
            rid = self.lookup_identity(y)
            self.rl.add(y)
            return RevocationBroadcast(self.rl.epoch, y, rid)

    # -- persistence ---------------------------------------------------------

    def snapshot(self) -> bytes:
        parts = [
            bytes([SNAPSHOT_VERSION]),
            self.public_key.encode(),
            struct.pack(">I", len(self._records)),
        ]
        for rec in self._records:
            parts += [rec.y.encode(), struct.pack(">H", len(rec.rid)), rec.rid]
        parts.append(struct.pack(">II", self.rl.epoch, len(self.rl.entries)))
        parts += [y.encode() for y in self.rl.entries]
        return b"".join(parts)

    @staticmethod
    def parse_snapshot(data: bytes) -> tuple[G1Point, list[RegistrationRecord], RevocationList]:
        """Decode a snapshot into (y_trc, records, revocation list)."""
        data = bytes(data)
        g = group.G1_LEN
        try:
            if data[0] != SNAPSHOT_VERSION:
                raise NonCanonicalEncoding(f"unknown snapshot version {data[0]:#x}")
            y_trc = G1Point.decode(data[1 : 1 + g])
            pos = 1 + g
            (count,) = struct.unpack_from(">I", data, pos)
            pos += 4
            records = []
            for _ in range(count):
                y = G1Point.decode(data[pos : pos + g])
                (rid_len,) = struct.unpack_from(">H", data, pos + g)
                pos += g + 2
                rid = data[pos : pos + rid_len]
                if len(rid) != rid_len:
                    raise WrongLength("truncated RID in snapshot")
                pos += rid_len
                records.append(RegistrationRecord(y, rid))
            epoch, rl_count = struct.unpack_from(">II", data, pos)
            pos += 8
            entries = [G1Point.decode(data[pos + i * g : pos + (i + 1) * g]) for i in range(rl_count)]
            pos += rl_count * g
        except (IndexError, struct.error) as exc:
            raise WrongLength("truncated TRC snapshot") from exc
        if pos != len(data):
            raise WrongLength("trailing bytes after TRC snapshot")
        return y_trc, records, RevocationList(epoch, entries)

    @classmethod
    def from_snapshot(cls, data: bytes, secret: int) -> "TrcState":
        y_trc, records, rl = cls.parse_snapshot(data)
        if group.P * secret != y_trc:
            raise ValueError("secret key does not match the snapshot's public key")
        return cls(TrcKeyPair(secret, y_trc), records, rl)

    def secret_key_bytes(self) -> bytes:
        return bytes([SECRET_KEY_VERSION]) + group.encode_scalar(self.keypair.secret)

    @staticmethod
    def parse_secret_key(data: bytes) -> int:
        if len(data) != 1 + group.SCALAR_LEN or data[0] != SECRET_KEY_VERSION:
            raise WrongLength("malformed TRC secret key file")
        return group.decode_scalar(data[1:])

    def save(self, path: str | Path) -> None:
        """Write the public snapshot to ``path`` and the secret key to ``path.key``."""
        path = Path(path)
        path.write_bytes(self.snapshot())
        key_path = path.with_name(path.name + ".key")
        key_path.write_bytes(self.secret_key_bytes())
        key_path.chmod(0o600)

    @classmethod
    def load(cls, path: str | Path) -> "TrcState":
        path = Path(path)
        secret = cls.parse_secret_key(path.with_name(path.name + ".key").read_bytes())
        return cls.from_snapshot(path.read_bytes(), secret)
