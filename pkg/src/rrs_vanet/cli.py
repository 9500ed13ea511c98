"""``rrs-vanet`` command line.

Exit status is 0 on success, 1 on a rejected signature / failed trace /
failed audit, and 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import analysis, rrs
from .authority import TrcState
from .errors import RrsError
from .group import G1_LEN, G1Point
from .messages import EventCode, SafetyPayload, SignedEnvelope
from .rrs import Ring, RingSignature, VehicleKeyPair
from .sim import load_config, run_simulation


def _seed(args) -> int | None:
    env = os.environ.get("RRS_SEED")
    if env:
        return int(env)
    return getattr(args, "seed", None)


def _read_trc_public(path: str) -> G1Point:
    """Accept a bare 48-byte public key or a full TRC snapshot."""
    data = Path(path).read_bytes()
    if len(data) == G1_LEN:
        return G1Point.decode(data)
    return TrcState.parse_snapshot(data)[0]


def _read_public(path: str) -> G1Point:
    data = Path(path).read_bytes()
    if len(data) == G1_LEN:
        return G1Point.decode(data)
    return VehicleKeyPair.decode(data).public


def cmd_keygen(args) -> int:
    trc = TrcState.create(_seed(args))
    trc.save(args.trc_out)
    Path(args.trc_out + ".pub").write_bytes(trc.public_key.encode())
    print(trc.public_key.encode().hex())
    return 0


def cmd_register(args) -> int:
    trc = TrcState.load(args.trc)
    keypair = trc.register_vehicle(args.rid.encode())
    trc.save(args.trc)
    Path(args.out).write_bytes(keypair.encode())
    print(keypair.public.encode().hex())
    return 0


def cmd_make_ring(args) -> int:
    keys = [_read_public(p) for p in args.member]
    keys += [G1Point.decode(bytes.fromhex(h)) for h in args.hex]
    Path(args.out).write_bytes(Ring(keys).encode())
    return 0


def cmd_payload(args) -> int:
    payload = SafetyPayload(args.x, args.y, args.speed, args.heading, args.timestamp_ms, EventCode[args.event.upper()])
    Path(args.out).write_bytes(payload.encode())
    return 0


def cmd_sign(args) -> int:
    keypair = VehicleKeyPair.decode(Path(args.key).read_bytes())
    ring = Ring.decode(Path(args.ring).read_bytes())
    y_trc = _read_trc_public(args.trc_pub)
    message = Path(args.msg).read_bytes()
    sig = rrs.sign(ring, keypair, ring.index_of(keypair.public), y_trc, message, _seed(args))
    Path(args.out).write_bytes(sig.encode())
    if args.envelope_out:
        envelope = SignedEnvelope(ring, sig, SafetyPayload.decode(message), args.rl_epoch)
        Path(args.envelope_out).write_bytes(envelope.encode())
    return 0


def cmd_verify(args) -> int:
    ring = Ring.decode(Path(args.ring).read_bytes())
    y_trc = _read_trc_public(args.trc_pub)
    message = Path(args.msg).read_bytes()
    try:
        sig = RingSignature.decode(Path(args.sig).read_bytes())
        ok = rrs.verify(ring, y_trc, message, sig)
    except RrsError as exc:
        print(f"reject: {exc}")
        return 1
    print("accept" if ok else "reject")
    return 0 if ok else 1


def cmd_trace(args) -> int:
    trc = TrcState.load(args.trc)
    envelope = SignedEnvelope.decode(Path(args.envelope).read_bytes())
    try:
        y, rid = trc.trace_to_identity(envelope, args.search)
    except RrsError as exc:
        print(f"trace failed: {exc}")
        return 1
    print(f"index {envelope.ring.index_of(y)}")
    print(f"key {y.encode().hex()}")
    print(f"rid {rid.decode(errors='backslashreplace')}")
    return 0


def cmd_revoke(args) -> int:
    trc = TrcState.load(args.trc)
    broadcast = trc.revoke(G1Point.decode(bytes.fromhex(args.key)))
    trc.save(args.trc)
    if args.broadcast_out:
        Path(args.broadcast_out).write_bytes(broadcast.encode())
    print(f"epoch {broadcast.epoch}")
    print(f"broadcast {broadcast.encode().hex()}")
    return 0


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    report = run_simulation(config)
    report.write(args.report_out, events=not args.no_events)
    sys.stdout.write(report.summary_text())
    return 0


def cmd_curves(args) -> int:
    Path(args.out).write_text(analysis.figure_csv(args.figure, n=args.n))
    return 0


def cmd_complexity(args) -> int:
    if args.protocol:
        print(analysis.tracing_complexity(args.protocol, args.search))
    else:
        sys.stdout.write(analysis.table5_text())
    return 0


def cmd_bench(args) -> int:
    report = analysis.bench_host(args.iters, ring_sizes=args.n)
    sys.stdout.write(report.to_text())
    if args.audit and not all(v.audit_ok for v in report.verify):
        print("op-count audit FAILED", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rrs-vanet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="create a TRC key pair and empty state")
    p.add_argument("--trc-out", required=True, help="snapshot path; also writes FILE.key and FILE.pub")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("register", help="register a vehicle and write its key file")
    p.add_argument("--trc", required=True)
    p.add_argument("--rid", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("make-ring", help="assemble a ring file from public keys")
    p.add_argument("--member", action="append", default=[], help="vehicle key file or 48-byte public key")
    p.add_argument("--hex", action="append", default=[], help="public key as hex")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_make_ring)

    p = sub.add_parser("payload", help="write a safety payload block")
    p.add_argument("--x", type=float, default=0.0)
    p.add_argument("--y", type=float, default=0.0)
    p.add_argument("--speed", type=float, default=0.0)
    p.add_argument("--heading", type=float, default=0.0)
    p.add_argument("--timestamp-ms", type=int, required=True)
    p.add_argument("--event", default="routine", choices=[e.name.lower() for e in EventCode])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_payload)

    p = sub.add_parser("sign", help="ring-sign a message file")
    p.add_argument("--key", required=True)
    p.add_argument("--ring", required=True)
    p.add_argument("--trc-pub", required=True)
    p.add_argument("--msg", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--envelope-out", help="also write a signed envelope (message must be a payload block)")
    p.add_argument("--rl-epoch", type=int, default=0)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_sign)

    p = sub.add_parser("verify", help="verify a ring signature (exit 0 accept, 1 reject)")
    p.add_argument("--ring", required=True)
    p.add_argument("--trc-pub", required=True)
    p.add_argument("--msg", required=True)
    p.add_argument("--sig", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("trace", help="identify the signer of an envelope")
    p.add_argument("--trc", required=True)
    p.add_argument("--envelope", required=True)
    p.add_argument("--search", default="binary", choices=["binary", "linear"])
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("revoke", help="revoke a registered public key")
    p.add_argument("--trc", required=True)
    p.add_argument("--key", required=True, help="public key as hex")
    p.add_argument("--broadcast-out")
    p.set_defaults(func=cmd_revoke)

    p = sub.add_parser("simulate", help="run a simulation from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--report-out", required=True)
    p.add_argument("--no-events", action="store_true", help="skip the event log")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("curves", help="write the CSV data for a cost figure")
    p.add_argument("--figure", type=int, required=True, choices=[2, 3, 4])
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=10, help="ring size used for T_RRSB in figure 3")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("complexity", help="tracing complexity table")
    p.add_argument("--table5", action="store_true", help="print the full table (default)")
    p.add_argument("--protocol")
    p.add_argument("--search", default="linear", choices=["linear", "binary"])
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("bench", help="measure host primitive costs and audit verify")
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--n", type=int, nargs="+", default=[1, 5, 10, 20])
    p.add_argument("--audit", action="store_true", help="exit 1 if the op-count audit fails")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RrsError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
