"""On-board unit logic: key collection, ring selection, message build/verify."""

from __future__ import annotations

import enum
import random
from typing import Callable

from . import rrs
from .authority import RevocationBroadcast, RevocationList
from .errors import InsufficientKeys, InvalidPayload, RrsError
from .group import G1Point, RngLike, make_rng
from .messages import SafetyPayload, SignedEnvelope
from .rrs import Ring, VehicleKeyPair

DEFAULT_KEY_POOL_CAP = 256
ABSORB_PROBABILITY = 0.5

Verifier = Callable[[Ring, G1Point, bytes, rrs.RingSignature], bool]


class Verdict(enum.Enum):
    ACCEPT = "accept"
    REVOKED_RING_MEMBER = "RevokedRingMember"
    BAD_SIGNATURE = "BadSignature"
    MALFORMED_ENVELOPE = "MalformedEnvelope"

    @property
    def accepted(self) -> bool:
        return self is Verdict.ACCEPT


class ObuState:
    """One vehicle's protocol state.

    ``collected_keys`` always holds the vehicle's own public key and never a
    key on the local revocation list, except that a vehicle whose own key was
    revoked keeps it (it can still sign, and everyone will reject it).

    All randomness (eviction, ring sampling, absorption, signing nonces) comes
    from ``rng``; pass a seed for reproducible runs.
    """

    def __init__(
        self,
        keypair: VehicleKeyPair,
        pseudo_id: bytes = b"",
        anonymity_level: int = 1,
        key_pool_cap: int = DEFAULT_KEY_POOL_CAP,
        rl: RevocationList | None = None,
        seed: RngLike = None,
    ) -> None:
        if anonymity_level < 1:
            raise ValueError("anonymity level must be at least 1")
        if key_pool_cap < anonymity_level:
            raise ValueError("key pool cap must be at least the anonymity level")
        self.keypair = keypair
        self.pseudo_id = pseudo_id
        self.anonymity_level = anonymity_level
        self.key_pool_cap = key_pool_cap
        self.rl = rl.copy() if rl is not None else RevocationList()
        self.rng: random.Random = make_rng(seed)
        self.collected_keys: dict[G1Point, None] = {keypair.public: None}
        self.ignored_revoked = 0
        self.last_timestamp_ms: int | None = None

    @property
    def public_key(self) -> G1Point:
        return self.keypair.public

    @property
    def pool_size(self) -> int:
        return len(self.collected_keys)

    def _others(self) -> list[G1Point]:
        return sorted(k for k in self.collected_keys if k != self.public_key)

    def collect_public_key(self, y: G1Point) -> bool:
        """Add ``y`` to the pool; returns whether the pool changed."""
        if y in self.collected_keys:
            return False
        if y in self.rl:
            self.ignored_revoked += 1
            return False
        if len(self.collected_keys) >= self.key_pool_cap:
            others = self._others()
            if not others:
                return False
            victim = self.rng.choice(others)
            del self.collected_keys[victim]
        self.collected_keys[y] = None
        return True

    def select_ring(self, anonymity_level: int | None = None) -> tuple[Ring, int]:
        level = self.anonymity_level if anonymity_level is None else anonymity_level
        if level < 1:
            raise ValueError("anonymity level must be at least 1")
        # prune before sampling so an honest ring never trips a receiver's RL check
        self._prune_revoked()
        candidates = self._others()
        if len(candidates) < level - 1:
            raise InsufficientKeys(f"need {level} keys for this anonymity level, pool has {len(candidates) + 1}")
        ring = Ring([self.public_key, *self.rng.sample(candidates, level - 1)])
        return ring, ring.index_of(self.public_key)

    def build_safety_message(
        self, payload: SafetyPayload, y_trc: G1Point, anonymity_level: int | None = None
    ) -> SignedEnvelope:
        if self.last_timestamp_ms is not None and payload.timestamp_ms <= self.last_timestamp_ms:
            raise InvalidPayload("timestamps must increase strictly per sender")
        ring, index = self.select_ring(anonymity_level)
        sig = rrs.sign(ring, self.keypair, index, y_trc, payload.encode(), self.rng)
        self.last_timestamp_ms = payload.timestamp_ms
        return SignedEnvelope(ring, sig, payload, self.rl.epoch)

    def verify_safety_message(
        self,
        envelope: SignedEnvelope | bytes,
        y_trc: G1Point,
        verifier: Verifier = rrs.verify,
    ) -> Verdict:
        """Check an incoming envelope; on acceptance absorb part of its ring."""
        if not isinstance(envelope, SignedEnvelope):
            try:
                envelope = SignedEnvelope.decode(envelope)
            except RrsError:
                return Verdict.MALFORMED_ENVELOPE
        if envelope.signature.n != len(envelope.ring):
            return Verdict.MALFORMED_ENVELOPE
        if self.rl.intersects(envelope.ring):
            return Verdict.REVOKED_RING_MEMBER
        if not verifier(envelope.ring, y_trc, envelope.message, envelope.signature):
            return Verdict.BAD_SIGNATURE
        self.absorb_ring_keys(envelope.ring)
        return Verdict.ACCEPT

    def absorb_ring_keys(self, ring: Ring) -> int:
        """Keep each ring member with probability 1/2; returns how many were added."""
        added = 0
        for y in ring:
            if self.rng.random() < ABSORB_PROBABILITY and self.collect_public_key(y):
                added += 1
        return added

    def apply_revocation(self, broadcast: RevocationBroadcast) -> bool:
        """Apply a TRC broadcast; stale or repeated broadcasts are ignored."""
        if broadcast.epoch <= self.rl.epoch or broadcast.y in self.rl:
            return False
        self.rl.add(broadcast.y, epoch=broadcast.epoch)
        self._prune_revoked()
        return True

    def _prune_revoked(self) -> None:
        for y in [k for k in self.collected_keys if k in self.rl and k != self.public_key]:
            del self.collected_keys[y]
