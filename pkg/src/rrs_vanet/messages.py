"""Safety payloads and signed envelopes, with their fixed binary layouts."""

from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass

from .errors import InvalidPayload, NonCanonicalEncoding, WrongLength
from .rrs import Ring, RingSignature

ENVELOPE_VERSION = 0x01


class EventCode(enum.IntEnum):
    ROUTINE = 0
    BRAKE = 1
    HAZARD = 2
    BOGUS_TEST = 3


@dataclass(frozen=True)
class SafetyPayload:
    """Position (m), speed (m/s), heading (degrees), timestamp (ms since epoch)."""

    x: float
    y: float
    speed: float
    heading: float
    timestamp_ms: int
    event: EventCode = EventCode.ROUTINE

    _FORMAT = struct.Struct(">ddddQB")
    SIZE = _FORMAT.size

    def __post_init__(self) -> None:
        for name in ("x", "y", "speed", "heading"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidPayload(f"{name} must be finite")
        if self.speed < 0:
            raise InvalidPayload("speed must be non-negative")
        if not 0 <= self.heading < 360:
            raise InvalidPayload("heading must be in [0, 360)")
        if not 0 <= self.timestamp_ms < 2**64:
            raise InvalidPayload("timestamp out of range")
        try:
            object.__setattr__(self, "event", EventCode(self.event))
        except ValueError:
            raise InvalidPayload(f"unknown event code {self.event!r}") from None

    def encode(self) -> bytes:
        return self._FORMAT.pack(self.x, self.y, self.speed, self.heading, self.timestamp_ms, self.event)

    @classmethod
    def decode(cls, data: bytes) -> "SafetyPayload":
        if len(data) != cls.SIZE:
            raise WrongLength(f"payload block must be {cls.SIZE} bytes, got {len(data)}")
        x, y, speed, heading, ts, event = cls._FORMAT.unpack(data)
        payload = cls(x, y, speed, heading, ts, event)
        if payload.encode() != bytes(data):
            raise NonCanonicalEncoding("payload block does not re-encode identically")
        return payload


@dataclass(frozen=True)
class SignedEnvelope:
    ring: Ring
    signature: RingSignature
    payload: SafetyPayload
    rl_epoch_seen: int

    @property
    def message(self) -> bytes:
        """The byte string that is actually signed."""
        return self.payload.encode()

    @property
    def degenerate_anonymity(self) -> bool:
        """A one-member ring names its signer to every receiver."""
        return len(self.ring) == 1

    def encode(self) -> bytes:
        return b"".join(
            [
                bytes([ENVELOPE_VERSION]),
                self.ring.encode(),
                self.signature.encode(),
                self.payload.encode(),
                struct.pack(">I", self.rl_epoch_seen),
            ]
        )

    @classmethod
    def decode(cls, data: bytes) -> "SignedEnvelope":
        data = bytes(data)
        if not data:
            raise WrongLength("empty envelope")
        if data[0] != ENVELOPE_VERSION:
            raise NonCanonicalEncoding(f"unknown envelope version {data[0]:#x}")
        ring, pos = Ring.decode_from(data, 1)
        sig, pos = RingSignature.decode_from(data, pos)
        end = pos + SafetyPayload.SIZE + 4
        if len(data) != end:
            raise WrongLength(f"envelope should be {end} bytes, got {len(data)}")
        payload = SafetyPayload.decode(data[pos : pos + SafetyPayload.SIZE])
        (epoch,) = struct.unpack_from(">I", data, pos + SafetyPayload.SIZE)
        return cls(ring, sig, payload, epoch)
