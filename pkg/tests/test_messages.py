import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import ring_of, trc, vehicle_keys
from rrs_vanet import rrs
from rrs_vanet.errors import InvalidPayload, NonCanonicalEncoding, RrsError, WrongLength
from rrs_vanet.messages import EventCode, SafetyPayload, SignedEnvelope

payloads = st.builds(
    SafetyPayload,
    st.floats(-1e6, 1e6),
    st.floats(-1e6, 1e6),
    st.floats(0, 100),
    st.floats(0, 360, exclude_max=True),
    st.integers(0, 2**64 - 1),
    st.sampled_from(list(EventCode)),
)


@settings(max_examples=200)
@given(payloads)
def test_payload_round_trip(p):
    data = p.encode()
    assert len(data) == SafetyPayload.SIZE == 41
    assert SafetyPayload.decode(data) == p


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(speed=-1.0),
        dict(heading=360.0),
        dict(heading=-0.5),
        dict(x=math.nan),
        dict(y=math.inf),
        dict(timestamp_ms=-1),
        dict(event=9),
    ],
)
def test_payload_validation(kwargs):
    base = dict(x=0.0, y=0.0, speed=1.0, heading=0.0, timestamp_ms=1)
    base.update(kwargs)
    with pytest.raises(InvalidPayload):
        SafetyPayload(**base)


def test_payload_decode_rejects_bad_blocks():
    data = SafetyPayload(1.0, 2.0, 3.0, 4.0, 5).encode()
    with pytest.raises(WrongLength):
        SafetyPayload.decode(data[:-1])
    with pytest.raises(InvalidPayload):
        SafetyPayload.decode(data[:-1] + b"\x07")


@pytest.fixture(scope="module")
def envelope():
    keys = vehicle_keys(3)
    ring = ring_of(keys)
    payload = SafetyPayload(10.0, 20.0, 13.5, 270.0, 1_700_000_000_000, EventCode.HAZARD)
    sig = rrs.sign(ring, keys[1], ring.index_of(keys[1].public), trc().public, payload.encode(), 2)
    return SignedEnvelope(ring, sig, payload, 4)


def test_envelope_round_trip(envelope):
    data = envelope.encode()
    assert data[0] == 0x01
    assert len(data) == 1 + 4 + 3 * 48 + rrs.RingSignature.encoded_len(3) + 41 + 4
    again = SignedEnvelope.decode(data)
    assert again == envelope
    assert rrs.verify(again.ring, trc().public, again.message, again.signature)
    assert again.message == envelope.payload.encode()


def test_envelope_decode_rejects_every_truncation(envelope):
    data = envelope.encode()
    for cut in range(0, len(data), 97):
        with pytest.raises(RrsError):
            SignedEnvelope.decode(data[:cut])
    with pytest.raises(WrongLength):
        SignedEnvelope.decode(data + b"\x00")
    with pytest.raises(NonCanonicalEncoding):
        SignedEnvelope.decode(b"\x02" + data[1:])


def test_degenerate_anonymity_flag(envelope):
    assert not envelope.degenerate_anonymity
    k = vehicle_keys(1)[0]
    ring = ring_of([k])
    p = SafetyPayload(0.0, 0.0, 0.0, 0.0, 1)
    sig = rrs.sign(ring, k, 0, trc().public, p.encode(), 1)
    assert SignedEnvelope(ring, sig, p, 0).degenerate_anonymity
