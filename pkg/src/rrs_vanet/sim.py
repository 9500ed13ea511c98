"""Deterministic discrete-event simulation of the protocol life cycle.

Vehicles move by random waypoint on a torus, broadcast signed safety messages
every ``message_period_ms`` to everyone within ``comm_range`` (unit-disk,
lossless, zero latency), verify what they hear and grow their key pools.
Scheduled bogus messages are reported to the TRC, which traces and revokes the
culprit; the revocation reaches every vehicle ``rl_propagation_delay_ms`` later.

Given the same config (seed included) two runs produce byte-identical
reports. Wall-clock timings are kept apart from the report for that reason.
"""

from __future__ import annotations

import dataclasses
import heapq
import io
import json
import math
import os
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from . import rrs
from .authority import RevocationBroadcast, TrcState
from .errors import InvalidConfig
from .group import G1Point, OpCounter, count_ops
from .messages import EventCode, SafetyPayload, SignedEnvelope
from .vehicle import ObuState, Verdict

TRC_ACTOR = -1
START_EPOCH_MS = 1_700_000_000_000


@dataclass(frozen=True)
class SimConfig:
    seed: int = 1
    num_vehicles: int = 10
    area_width: float = 1000.0
    area_height: float = 1000.0
    comm_range: float = 300.0
    speed_min: float = 5.0
    speed_max: float = 20.0
    message_period_ms: int = 1000
    duration_ms: int = 60_000
    anonymity_level: int = 4
    # non-empty: each vehicle draws its level uniformly from these
    anonymity_levels: tuple[int, ...] = ()
    bogus_injections: tuple[tuple[int, int], ...] = ()
    rl_propagation_delay_ms: int = 500
    sample_interval_ms: int = 5_000
    key_pool_cap: int = 256

    def validate(self) -> None:
        positive = [
            "num_vehicles",
            "area_width",
            "area_height",
            "comm_range",
            "speed_max",
            "message_period_ms",
            "duration_ms",
            "anonymity_level",
            "sample_interval_ms",
            "key_pool_cap",
        ]
        for name in positive:
            if not getattr(self, name) > 0:
                raise InvalidConfig(f"{name} must be positive")
        if self.num_vehicles < 2:
            raise InvalidConfig("messaging needs at least two vehicles")
        if not 0 < self.speed_min <= self.speed_max:
            raise InvalidConfig("need 0 < speed_min <= speed_max")
        if self.rl_propagation_delay_ms < 0:
            raise InvalidConfig("rl_propagation_delay_ms must be non-negative")
        if any(level < 1 for level in self.anonymity_levels):
            raise InvalidConfig("anonymity levels must be at least 1")
        levels = self.anonymity_levels or (self.anonymity_level,)
        if max(levels) > self.key_pool_cap:
            raise InvalidConfig("anonymity level exceeds key_pool_cap")
        for t, v in self.bogus_injections:
            if not 0 <= v < self.num_vehicles:
                raise InvalidConfig(f"bogus injection names unknown vehicle {v}")
            if not 0 <= t < self.duration_ms:
                raise InvalidConfig(f"bogus injection at {t} ms is outside the run")

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name == "bogus_injections":
                value = ",".join(f"{t}:{v}" for t, v in value)
            elif f.name == "anonymity_levels":
                value = ",".join(str(v) for v in value)
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SimConfig":
        """Parse flat ``key = value`` lines; ``#`` starts a comment."""
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        values: dict[str, object] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = (part.strip() for part in line.partition("="))
            if not sep or key not in types:
                raise InvalidConfig(f"line {lineno}: cannot parse {raw!r}")
            try:
                values[key] = _parse_field(key, types[key], value)
            except ValueError as exc:
                raise InvalidConfig(f"line {lineno}: bad value for {key}: {value!r}") from exc
        config = cls(**values)
        config.validate()
        return config


def _parse_field(key: str, kind: str, value: str):
    if key == "bogus_injections":
        if not value:
            return ()
        pairs = []
        for item in value.split(","):
            t, v = item.split(":")
            pairs.append((int(t), int(v)))
        return tuple(pairs)
    if key == "anonymity_levels":
        return tuple(int(v) for v in value.split(",") if v.strip())
    if kind == "int":
        return int(value)
    if kind == "float":
        return float(value)
    raise ValueError(f"unsupported field type {kind}")


def load_config(path: str | Path, env: Mapping[str, str] = os.environ) -> SimConfig:
    """Read a config file; ``RRS_SEED`` in ``env`` overrides its seed."""
    config = SimConfig.from_text(Path(path).read_text())
    if env.get("RRS_SEED"):
        config = dataclasses.replace(config, seed=int(env["RRS_SEED"]))
    return config


# -- mobility --------------------------------------------------------------------


def _wrap(d: float, size: float) -> float:
    return (d + size / 2) % size - size / 2


class _Mover:
    """Random waypoint on a W x H torus, no pause time."""

    def __init__(self, config: SimConfig, rng: random.Random) -> None:
        self.w = config.area_width
        self.h = config.area_height
        self.vmin = config.speed_min
        self.vmax = config.speed_max
        self.rng = rng
        self.x = rng.uniform(0, self.w)
        self.y = rng.uniform(0, self.h)
        self.t_ms = 0
        self._new_leg()

    def _new_leg(self) -> None:
        self.wx = self.rng.uniform(0, self.w)
        self.wy = self.rng.uniform(0, self.h)
        self.speed = self.rng.uniform(self.vmin, self.vmax)
        dx = _wrap(self.wx - self.x, self.w)
        dy = _wrap(self.wy - self.y, self.h)
        self.heading = math.degrees(math.atan2(dx, dy)) % 360.0

    def advance(self, t_ms: int) -> None:
        budget = self.speed * (t_ms - self.t_ms) / 1000.0
        self.t_ms = t_ms
        while budget > 0:
            dx = _wrap(self.wx - self.x, self.w)
            dy = _wrap(self.wy - self.y, self.h)
            dist = math.hypot(dx, dy)
            if budget < dist:
                self.x = (self.x + dx * budget / dist) % self.w
                self.y = (self.y + dy * budget / dist) % self.h
                return
            self.x, self.y = self.wx, self.wy
            # carry the leftover time into the next leg at its own speed
            leftover_s = (budget - dist) / self.speed
            self._new_leg()
            budget = leftover_s * self.speed

    def distance_to(self, other: "_Mover") -> float:
        return math.hypot(_wrap(other.x - self.x, self.w), _wrap(other.y - self.y, self.h))


# -- report ----------------------------------------------------------------------

_OP_FIELDS = ("n_pairings", "n_g1_muls", "n_g2_muls", "n_gt_exps", "n_hashes")
_ROW_FIELDS = (
    "time_ms",
    "messages_sent",
    "deliveries",
    "out_of_range",
    "accepted",
    "rejected_revoked",
    "rejected_bad_signature",
    "rejected_malformed",
    "revocations",
    "mean_pool_size",
)


@dataclass
class SimReport:
    config: SimConfig
    messages_sent: int = 0
    bogus_sent: int = 0
    deliveries: int = 0
    out_of_range: int = 0
    accepted: int = 0
    rejected: dict[str, int] = field(
        default_factory=lambda: {v.value: 0 for v in Verdict if v is not Verdict.ACCEPT}
    )
    decoy_rejections: int = 0
    traces_performed: int = 0
    traces_correct: int = 0
    revocations: int = 0
    ring_size_total: int = 0
    degenerate_rings: int = 0
    verifications: int = 0
    sign_ops: dict[str, int] = field(default_factory=lambda: dict.fromkeys(_OP_FIELDS, 0))
    verify_ops: dict[str, int] = field(default_factory=lambda: dict.fromkeys(_OP_FIELDS, 0))
    pool_size_samples: list[float] = field(default_factory=list)
    rows: list[dict] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    # wall-clock seconds; deliberately not part of any deterministic output
    sign_seconds: list[float] = field(default_factory=list)
    verify_seconds: list[float] = field(default_factory=list)

    @property
    def total_rejected(self) -> int:
        return sum(self.rejected.values())

    @property
    def mean_ring_size(self) -> float:
        return self.ring_size_total / self.messages_sent if self.messages_sent else 0.0

    @property
    def mean_pool_size(self) -> float:
        s = self.pool_size_samples
        return sum(s) / len(s) if s else 0.0

    def summary(self) -> dict[str, object]:
        out: dict[str, object] = {
            "seed": self.config.seed,
            "num_vehicles": self.config.num_vehicles,
            "duration_ms": self.config.duration_ms,
            "messages_sent": self.messages_sent,
            "bogus_sent": self.bogus_sent,
            "deliveries": self.deliveries,
            "out_of_range": self.out_of_range,
            "accepted": self.accepted,
        }
        for reason, n in self.rejected.items():
            out[f"rejected_{reason}"] = n
        out.update(
            decoy_rejections=self.decoy_rejections,
            traces_performed=self.traces_performed,
            traces_correct=self.traces_correct,
            revocations=self.revocations,
            mean_ring_size=f"{self.mean_ring_size:.4f}",
            degenerate_rings=self.degenerate_rings,
            mean_pool_size=f"{self.mean_pool_size:.4f}",
        )
        for name in _OP_FIELDS:
            out[f"sign_mean_{name}"] = _mean_str(self.sign_ops[name], self.messages_sent)
        for name in _OP_FIELDS:
            out[f"verify_mean_{name}"] = _mean_str(self.verify_ops[name], self.verifications)
        return out

    def summary_text(self) -> str:
        return "".join(f"{k}: {v}\n" for k, v in self.summary().items())

    def metrics_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(_ROW_FIELDS) + "\n")
        for row in self.rows:
            buf.write(",".join(str(row[k]) for k in _ROW_FIELDS) + "\n")
        return buf.getvalue()

    def events_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.events)

    def to_bytes(self) -> bytes:
        """Deterministic serialization: summary block, metrics CSV, event log."""
        return (self.summary_text() + "\n" + self.metrics_csv() + "\n" + self.events_jsonl()).encode()

    def timings_csv(self) -> str:
        lines = ["operation,seconds"]
        lines += [f"sign,{s:.6f}" for s in self.sign_seconds]
        lines += [f"verify,{s:.6f}" for s in self.verify_seconds]
        return "\n".join(lines) + "\n"

    def write(self, out_dir: str | Path, events: bool = True) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.txt").write_text(self.summary_text())
        (out / "metrics.csv").write_text(self.metrics_csv())
        if events:
            (out / "events.jsonl").write_text(self.events_jsonl())
        (out / "timings.csv").write_text(self.timings_csv())


def _mean_str(total: int, count: int) -> str:
    return f"{total / count:.4f}" if count else "0.0000"


# -- simulation --------------------------------------------------------------------


class _MemoVerifier:
    """Scheme-level verify is pure, so each envelope is checked once for all receivers."""

    def __init__(self, report: SimReport) -> None:
        self.report = report
        self._cache: dict[int, tuple[rrs.RingSignature, bool]] = {}

    def __call__(self, ring, y_trc, message, sig) -> bool:
        hit = self._cache.get(id(sig))
        if hit is not None and hit[0] is sig:
            return hit[1]
        t0 = time.perf_counter()
        with count_ops() as ops:
            ok = rrs.verify(ring, y_trc, message, sig)
        self.report.verify_seconds.append(time.perf_counter() - t0)
        self.report.verifications += 1
        _add_ops(self.report.verify_ops, ops)
        self._cache[id(sig)] = (sig, ok)
        return ok


def _add_ops(totals: dict[str, int], ops: OpCounter) -> None:
    for name in _OP_FIELDS:
        totals[name] += getattr(ops, name)


class Simulation:
    def __init__(self, config: SimConfig) -> None:
        config.validate()
        self.config = config
        master = random.Random(config.seed)
        self.trc = TrcState.create(master.getrandbits(64))
        self.report = SimReport(config)
        self.verifier = _MemoVerifier(self.report)
        self.obus: list[ObuState] = []
        self.movers: list[_Mover] = []
        self.rids: list[bytes] = []
        self.key_owner: dict[G1Point, int] = {}
        for v in range(config.num_vehicles):
            rid = f"vehicle-{v:04d}".encode()
            keypair = self.trc.register_vehicle(rid)
            if config.anonymity_levels:
                level = master.choice(config.anonymity_levels)
            else:
                level = config.anonymity_level
            self.obus.append(
                ObuState(
                    keypair,
                    pseudo_id=f"pid-{v:04d}".encode(),
                    anonymity_level=level,
                    key_pool_cap=config.key_pool_cap,
                    rl=self.trc.rl,
                    seed=master.getrandbits(64),
                )
            )
            self.movers.append(_Mover(config, random.Random(master.getrandbits(64))))
            self.rids.append(rid)
            self.key_owner[keypair.public] = v
        self._queue: list[tuple] = []
        self._seq = 0
        self._offsets = [master.randrange(config.message_period_ms) for _ in range(config.num_vehicles)]
        self.revoked_vehicles: set[int] = set()

    def _push(self, t: int, actor: int, kind: str, data=None) -> None:
        # ties resolve by (time, actor, insertion order)
        heapq.heappush(self._queue, (t, actor, self._seq, kind, data))
        self._seq += 1

    def _log(self, **event) -> None:
        self.report.events.append(event)

    def run(self) -> SimReport:
        cfg = self.config
        for v, offset in enumerate(self._offsets):
            self._push(offset, v, "broadcast", EventCode.ROUTINE)
        for t, v in cfg.bogus_injections:
            self._push(t, v, "broadcast", EventCode.BOGUS_TEST)
        for t in range(0, cfg.duration_ms + 1, cfg.sample_interval_ms):
            self._push(t, cfg.num_vehicles, "sample")

        while self._queue:
            t, actor, _, kind, data = heapq.heappop(self._queue)
            if t > cfg.duration_ms:
                break
            if kind == "broadcast":
                self._broadcast(t, actor, data)
                if data is EventCode.ROUTINE:
                    self._push(t + cfg.message_period_ms, actor, "broadcast", EventCode.ROUTINE)
            elif kind == "dispute":
                self._dispute(t, data)
            elif kind == "deliver_revocation":
                self._deliver_revocation(t, data)
            elif kind == "sample":
                self._sample(t)
        return self.report

    def _broadcast(self, t: int, v: int, event: EventCode) -> None:
        obu = self.obus[v]
        mover = self.movers[v]
        for m in self.movers:
            m.advance(t)
        ts = START_EPOCH_MS + t
        if obu.last_timestamp_ms is not None and ts <= obu.last_timestamp_ms:
            ts = obu.last_timestamp_ms + 1
        payload = SafetyPayload(
            round(mover.x, 3), round(mover.y, 3), round(mover.speed, 3), round(mover.heading, 3) % 360.0, ts, event
        )
        # cold start: sign at the largest level the pool allows
        level = min(obu.anonymity_level, obu.pool_size)
        t0 = time.perf_counter()
        with count_ops() as ops:
            envelope = obu.build_safety_message(payload, self.trc.public_key, level)
        self.report.sign_seconds.append(time.perf_counter() - t0)
        _add_ops(self.report.sign_ops, ops)

        rep = self.report
        msg_id = rep.messages_sent
        rep.messages_sent += 1
        rep.ring_size_total += len(envelope.ring)
        rep.degenerate_rings += envelope.degenerate_anonymity
        if event is EventCode.BOGUS_TEST:
            rep.bogus_sent += 1
        self._log(
            t=t, kind="send", vehicle=v, msg=msg_id, event=event.name, ring_size=len(envelope.ring),
            ring_members=sorted(self.key_owner[k] for k in envelope.ring),
        )

        for u, receiver in enumerate(self.obus):
            if u == v:
                continue
            if mover.distance_to(self.movers[u]) > self.config.comm_range:
                rep.out_of_range += 1
                continue
            rep.deliveries += 1
            verdict = receiver.verify_safety_message(envelope, self.trc.public_key, self.verifier)
            if verdict is Verdict.ACCEPT:
                rep.accepted += 1
            else:
                rep.rejected[verdict.value] += 1
                if verdict is Verdict.REVOKED_RING_MEMBER and v not in self.revoked_vehicles:
                    rep.decoy_rejections += 1
            self._log(t=t, kind="receive", vehicle=u, msg=msg_id, sender=v, verdict=verdict.value)

        if event is EventCode.BOGUS_TEST:
            self._push(t, TRC_ACTOR, "dispute", (msg_id, v, envelope))

    def _dispute(self, t: int, data: tuple[int, int, SignedEnvelope]) -> None:
        msg_id, culprit, envelope = data
        y, rid = self.trc.trace_to_identity(envelope)
        rep = self.report
        rep.traces_performed += 1
        correct = rid == self.rids[culprit]
        rep.traces_correct += correct
        self._log(t=t, kind="trace", msg=msg_id, traced_rid=rid.decode(), correct=correct)
        if y in self.trc.rl:
            return
        broadcast = self.trc.revoke(y)
        rep.revocations += 1
        self._log(t=t, kind="revoke", vehicle=self.key_owner[y], epoch=broadcast.epoch)
        self._push(t + self.config.rl_propagation_delay_ms, TRC_ACTOR, "deliver_revocation", broadcast)

    def _deliver_revocation(self, t: int, broadcast: RevocationBroadcast) -> None:
        for obu in self.obus:
            obu.apply_revocation(broadcast)
        self.revoked_vehicles.add(self.key_owner[broadcast.y])
        self._log(t=t, kind="revocation_delivered", vehicle=self.key_owner[broadcast.y], epoch=broadcast.epoch)

    def _sample(self, t: int) -> None:
        rep = self.report
        mean_pool = sum(o.pool_size for o in self.obus) / len(self.obus)
        rep.pool_size_samples.append(mean_pool)
        rep.rows.append(
            {
                "time_ms": t,
                "messages_sent": rep.messages_sent,
                "deliveries": rep.deliveries,
                "out_of_range": rep.out_of_range,
                "accepted": rep.accepted,
                "rejected_revoked": rep.rejected[Verdict.REVOKED_RING_MEMBER.value],
                "rejected_bad_signature": rep.rejected[Verdict.BAD_SIGNATURE.value],
                "rejected_malformed": rep.rejected[Verdict.MALFORMED_ENVELOPE.value],
                "revocations": rep.revocations,
                "mean_pool_size": f"{mean_pool:.3f}",
            }
        )


def run_simulation(config: SimConfig) -> SimReport:
    return Simulation(config).run()


def make_bogus_payload(obu: ObuState, x: float = 0.0, y: float = 0.0, timestamp_ms: int | None = None) -> SafetyPayload:
    """A fabricated hazard report from an insider; it signs and verifies like any other."""
    if timestamp_ms is None:
        timestamp_ms = (obu.last_timestamp_ms or START_EPOCH_MS) + 1
    return SafetyPayload(x, y, 0.0, 0.0, timestamp_ms, EventCode.BOGUS_TEST)
