"""Closed-form cost models for the four compared protocols, plus a host benchmark.

Everything on the formula side is exact: times are ``Decimal`` milliseconds,
ratios are ``Fraction`` and only get rounded when written to CSV.
"""

from __future__ import annotations

import enum
import math
import random
import statistics
import time
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from typing import Iterable

from . import group, rrs
from .errors import UnknownProtocol

RATIO_PLACES = Decimal("1e-12")


class Protocol(enum.Enum):
    LAB = "LAB"  # large set of anonymous keys per OBU
    GSB = "GSB"  # group signatures
    RSUB = "RSUB"  # roadside-unit issued short-term keys
    RRSB = "RRSB"  # revocable ring signatures (this package)

    @classmethod
    def parse(cls, value: "Protocol | str") -> "Protocol":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise UnknownProtocol(f"unknown protocol {value!r}") from None


@dataclass(frozen=True)
class CostParams:
    T_pmul: Decimal = Decimal("0.6")
    T_pair: Decimal = Decimal("4.5")
    N_okey: int = 10**4
    N_obu: int = 10**7
    N_rsu: int = 10**4
    N_rkey: int = 10**4

    def __post_init__(self) -> None:
        object.__setattr__(self, "T_pmul", Decimal(str(self.T_pmul)))
        object.__setattr__(self, "T_pair", Decimal(str(self.T_pair)))
        for name in ("T_pmul", "T_pair", "N_okey", "N_obu", "N_rsu", "N_rkey"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


DEFAULT_PARAMS = CostParams()


def storage_overhead(protocol: Protocol | str, m: int, params: CostParams = DEFAULT_PARAMS) -> int:
    """OBU storage in key units with ``m`` revoked vehicles."""
    protocol = Protocol.parse(protocol)
    if m < 0:
        raise ValueError("m must be non-negative")
    if protocol is Protocol.LAB:
        return (m + 1) * params.N_okey
    if protocol in (Protocol.GSB, Protocol.RRSB):
        return m + 1
    return 2


def verify_time(protocol: Protocol | str, x: int | None = None, params: CostParams = DEFAULT_PARAMS) -> Decimal:
    """Per-message verification time in ms.

    ``x`` is the ring size n for RRSB and the revoked count m for GSB; RSUB
    ignores it. LAB has no verification model here.
    """
    protocol = Protocol.parse(protocol)
    if protocol is Protocol.RSUB:
        return 3 * params.T_pair + 11 * params.T_pmul
    if protocol is Protocol.LAB:
        raise UnknownProtocol("no verification-time model for LAB")
    if x is None or x < 0:
        raise ValueError(f"{protocol.value} needs a non-negative size argument")
    if protocol is Protocol.RRSB:
        return params.T_pair + (2 * x + 1) * params.T_pmul
    return 6 * params.T_pmul + (4 + x) * params.T_pair


@dataclass(frozen=True)
class CostCurve:
    protocol: str
    variable: str
    points: tuple[tuple[int, Fraction], ...]

    def __post_init__(self) -> None:
        xs = [x for x, _ in self.points]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("curve abscissae must be strictly increasing")

    @property
    def values(self) -> list[Fraction]:
        return [v for _, v in self.points]


def cost_ratio_curves(
    which: str, xs: Iterable[int] | None = None, params: CostParams = DEFAULT_PARAMS, n: int = 10
) -> CostCurve:
    """``T_RG`` over revoked counts m (at ring size ``n``) or ``T_RR`` over ring sizes n."""
    if which == "T_RG":
        xs = list(range(1, 101) if xs is None else xs)
        rrsb = verify_time(Protocol.RRSB, n, params)
        points = [(m, Fraction(rrsb) / Fraction(verify_time(Protocol.GSB, m, params))) for m in xs]
        variable = "m"
    elif which == "T_RR":
        xs = list(range(1, 51) if xs is None else xs)
        rsub = Fraction(verify_time(Protocol.RSUB, None, params))
        points = [(k, Fraction(verify_time(Protocol.RRSB, k, params)) / rsub) for k in xs]
        variable = "n"
    else:
        raise ValueError(f"unknown ratio {which!r}; expected T_RG or T_RR")
    if not points:
        raise ValueError("empty range")
    return CostCurve(which, variable, tuple(points))


def format_ratio(value: Fraction) -> str:
    q = Decimal(value.numerator) / Decimal(value.denominator)
    return str(q.quantize(RATIO_PLACES, rounding=ROUND_HALF_EVEN))


def figure_csv(figure: int, n: int = 10, params: CostParams = DEFAULT_PARAMS) -> str:
    """CSV data behind figure 2 (storage), 3 (T_RG over m) or 4 (T_RR over n)."""
    if figure == 2:
        lines = ["m,LAB,GSB,RSUB,RRSB"]
        for m in range(1, 101):
            lines.append(",".join([str(m)] + [str(storage_overhead(p, m, params)) for p in Protocol]))
    elif figure == 3:
        lines = [f"m,T_RRSB_ms(n={n}),T_GSB_ms,T_RG"]
        curve = cost_ratio_curves("T_RG", params=params, n=n)
        for m, ratio in curve.points:
            lines.append(f"{m},{verify_time('RRSB', n, params)},{verify_time('GSB', m, params)},{format_ratio(ratio)}")
    elif figure == 4:
        lines = ["n,T_RRSB_ms,T_RSUB_ms,T_RR"]
        curve = cost_ratio_curves("T_RR", params=params)
        for k, ratio in curve.points:
            lines.append(f"{k},{verify_time('RRSB', k, params)},{verify_time('RSUB', None, params)},{format_ratio(ratio)}")
    else:
        raise ValueError(f"no figure {figure}; expected 2, 3 or 4")
    return "\n".join(lines) + "\n"


# -- tracing complexity -----------------------------------------------------------


@dataclass(frozen=True)
class TracingComplexity:
    protocol: Protocol
    search: str
    expression: str
    magnitude: float

    def __str__(self) -> str:
        return f"{self.protocol.value} {self.search}: {self.expression} ~ {self.magnitude:.6g}"


def tracing_complexity(protocol: Protocol | str, search: str, params: CostParams = DEFAULT_PARAMS) -> TracingComplexity:
    """Authority-side work to map a message to a vehicle, as a big-O and a size estimate."""
    protocol = Protocol.parse(protocol)
    if search not in ("linear", "binary"):
        raise ValueError(f"search must be 'linear' or 'binary', got {search!r}")
    if protocol is Protocol.LAB:
        expr, size = "N_obu·N_okey", params.N_obu * params.N_okey
    elif protocol is Protocol.RSUB:
        # the linear and binary entries use different combinations; kept as given
        if search == "linear":
            return TracingComplexity(protocol, search, "O(N_rsu+N_rkey)", float(params.N_rsu + params.N_rkey))
        expr, size = "N_rsu·N_rkey", params.N_rsu * params.N_rkey
    else:
        expr, size = "N_obu", params.N_obu
    if search == "linear":
        return TracingComplexity(protocol, search, f"O({expr})", float(size))
    return TracingComplexity(protocol, search, f"O(log({expr}))", math.log2(size))


def table5_text(params: CostParams = DEFAULT_PARAMS) -> str:
    lines = [f"{'Protocol':<9}{'Linear search':<34}{'Binary search':<34}"]
    for p in Protocol:
        cells = []
        for search in ("linear", "binary"):
            tc = tracing_complexity(p, search, params)
            cells.append(f"{tc.expression} ~ {tc.magnitude:.4g}")
        lines.append(f"{p.value + ':':<9}{cells[0]:<34}{cells[1]:<34}")
    return "\n".join(lines) + "\n"


# -- host benchmark ----------------------------------------------------------------


@dataclass(frozen=True)
class Timing:
    """Median and interquartile range of repeated measurements, in ms."""

    median: float
    q1: float
    q3: float
    samples: int

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1

    @classmethod
    def of(cls, samples_ms: list[float]) -> "Timing":
        if len(samples_ms) == 1:
            v = samples_ms[0]
            return cls(v, v, v, 1)
        q1, med, q3 = statistics.quantiles(samples_ms, n=4, method="inclusive")
        return cls(med, q1, q3, len(samples_ms))


def _time_ms(fn, reps: int) -> Timing:
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        samples.append((time.perf_counter() - t0) * 1000.0)
    return Timing.of(samples)


@dataclass(frozen=True)
class VerifyBench:
    n: int
    measured: Timing
    predicted_ms: float  # T_pair + 2n T_pmul + 2 T_gtexp from host constants
    published_formula_ms: float  # T_pair + (2n+1) T_pmul from host constants
    n_pairings: int
    n_g1_muls: int
    n_gt_exps: int

    @property
    def relative_error(self) -> float:
        return (self.measured.median - self.predicted_ms) / self.predicted_ms

    @property
    def formula_delta_ms(self) -> float:
        return self.published_formula_ms - self.predicted_ms

    @property
    def audit_ok(self) -> bool:
        return self.n_pairings == 1 and self.n_g1_muls == 2 * self.n


@dataclass
class BenchReport:
    t_pmul: Timing
    t_pair: Timing
    t_gtexp: Timing
    verify: list[VerifyBench] = field(default_factory=list)

    @property
    def params(self) -> CostParams:
        """Host-measured constants in the form the cost formulas take."""
        return CostParams(
            T_pmul=Decimal(f"{self.t_pmul.median:.4f}"), T_pair=Decimal(f"{self.t_pair.median:.4f}")
        )

    def to_text(self) -> str:
        lines = [
            "primitive,median_ms,iqr_ms,samples",
            f"T_pmul,{self.t_pmul.median:.4f},{self.t_pmul.iqr:.4f},{self.t_pmul.samples}",
            f"T_pair,{self.t_pair.median:.4f},{self.t_pair.iqr:.4f},{self.t_pair.samples}",
            f"T_gtexp,{self.t_gtexp.median:.4f},{self.t_gtexp.iqr:.4f},{self.t_gtexp.samples}",
            "",
            "n,measured_ms,iqr_ms,predicted_ms,rel_error,published_formula_ms,formula_delta_ms,pairings,g1_muls,gt_exps,audit",
        ]
        for v in self.verify:
            lines.append(
                f"{v.n},{v.measured.median:.4f},{v.measured.iqr:.4f},{v.predicted_ms:.4f},"
                f"{v.relative_error:+.4f},{v.published_formula_ms:.4f},{v.formula_delta_ms:+.4f},"
                f"{v.n_pairings},{v.n_g1_muls},{v.n_gt_exps},{'ok' if v.audit_ok else 'FAIL'}"
            )
        return "\n".join(lines) + "\n"


def bench_host(iters: int = 1000, ring_sizes: Iterable[int] = (1, 5, 10, 20), verify_reps: int = 30, seed: int = 7) -> BenchReport:
    """Measure primitive costs, then time and op-count verify at each ring size."""
    rng = random.Random(seed)
    scalars = [group.random_scalar(rng, nonzero=True) for _ in range(iters)]
    it = iter(scalars * 3)
    t_pmul = _time_ms(lambda: group.P * next(it), iters)
    t_pair = _time_ms(lambda: group.pairing(group.P, group.P_HAT), iters)
    base = group.pairing(group.P, group.P_HAT)
    # GT exponentiation is far slower than the others; fewer samples suffice
    t_gtexp = _time_ms(lambda: base ** next(it), max(10, iters // 10))

    trc = rrs.trc_keygen(rng.getrandbits(64))
    report = BenchReport(t_pmul, t_pair, t_gtexp)
    for n in ring_sizes:
        keys = [rrs.derive_vehicle_key(trc.secret, f"bench-{i}".encode()) for i in range(n)]
        ring = rrs.Ring([k.public for k in keys])
        signer = keys[0]
        index = ring.index_of(signer.public)
        msg = b"bench message"
        sig = rrs.sign(ring, signer, index, trc.public, msg, rng)
        with group.count_ops() as ops:
            assert rrs.verify(ring, trc.public, msg, sig)
        measured = _time_ms(lambda: rrs.verify(ring, trc.public, msg, sig), verify_reps)
        report.verify.append(
            VerifyBench(
                n=n,
                measured=measured,
                predicted_ms=t_pair.median + 2 * n * t_pmul.median + 2 * t_gtexp.median,
                published_formula_ms=t_pair.median + (2 * n + 1) * t_pmul.median,
                n_pairings=ops.n_pairings,
                n_g1_muls=ops.n_g1_muls,
                n_gt_exps=ops.n_gt_exps,
            )
        )
    return report
