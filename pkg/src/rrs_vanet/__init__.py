"""Revocable ring signatures for conditional-privacy vehicular messaging."""

from .authority import RevocationBroadcast, RevocationList, TrcState
from .errors import RrsError
from .group import G1Point, G2Point, GtElement, OpCounter, count_ops, pairing
from .messages import EventCode, SafetyPayload, SignedEnvelope
from .rrs import Ring, RingSignature, derive_vehicle_key, sign, trace, trc_keygen, verify
from .vehicle import ObuState, Verdict

__version__ = "0.1.0"

__all__ = [
    "EventCode",
    "G1Point",
    "G2Point",
    "GtElement",
    "ObuState",
    "OpCounter",
    "RevocationBroadcast",
    "RevocationList",
    "Ring",
    "RingSignature",
    "RrsError",
    "SafetyPayload",
    "SignedEnvelope",
    "TrcState",
    "Verdict",
    "count_ops",
    "derive_vehicle_key",
    "pairing",
    "sign",
    "trace",
    "trc_keygen",
    "verify",
]
