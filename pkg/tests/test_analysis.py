import csv
import io
import math
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

import pytest

from rrs_vanet import analysis
from rrs_vanet.analysis import CostCurve, CostParams, Protocol
from rrs_vanet.errors import UnknownProtocol

GOLDEN = Path(__file__).parent / "golden"

# Reference constants as exact fractions, written independently of CostParams
PMUL = Fraction(6, 10)
PAIR = Fraction(45, 10)


def ref_rrsb(n):
    return PAIR + (2 * n + 1) * PMUL


def ref_gsb(m):
    return 6 * PMUL + (4 + m) * PAIR


REF_RSUB = 3 * PAIR + 11 * PMUL


def test_verify_time_published_values():
    assert analysis.verify_time("RSUB") == Decimal("20.1")
    assert analysis.verify_time("RRSB", 1) == Decimal("6.3")
    assert analysis.verify_time("GSB", 0) == Decimal("21.6")
    assert analysis.verify_time("RRSB", 10) == Decimal("17.1")


@pytest.mark.parametrize("x", [0, 1, 2, 17, 50, 100])
def test_verify_time_matches_reference(x):
    assert Fraction(analysis.verify_time("RRSB", x)) == ref_rrsb(x)
    assert Fraction(analysis.verify_time("GSB", x)) == ref_gsb(x)


def test_verify_time_errors():
    with pytest.raises(UnknownProtocol):
        analysis.verify_time("LAB", 1)
    with pytest.raises(UnknownProtocol):
        analysis.verify_time("XYZ", 1)
    with pytest.raises(ValueError):
        analysis.verify_time("RRSB", -1)
    with pytest.raises(ValueError):
        analysis.verify_time("GSB")


def test_storage_overhead_all_m():
    for m in range(0, 101):
        assert analysis.storage_overhead("LAB", m) == (m + 1) * 10**4
        assert analysis.storage_overhead("GSB", m) == m + 1
        assert analysis.storage_overhead("RRSB", m) == m + 1
        assert analysis.storage_overhead("RSUB", m) == 2
    assert analysis.storage_overhead(Protocol.LAB, 1) == 20_000
    with pytest.raises(UnknownProtocol):
        analysis.storage_overhead("ABC", 1)
    with pytest.raises(ValueError):
        analysis.storage_overhead("GSB", -1)


def test_cost_params_validation():
    with pytest.raises(ValueError):
        CostParams(T_pmul=Decimal(0))
    with pytest.raises(ValueError):
        CostParams(N_obu=-1)
    assert CostParams(T_pmul="0.5").T_pmul == Decimal("0.5")


def test_ratio_curves_monotone_and_exact():
    rg = analysis.cost_ratio_curves("T_RG")
    rr = analysis.cost_ratio_curves("T_RR")
    assert [x for x, _ in rg.points] == list(range(1, 101))
    assert [x for x, _ in rr.points] == list(range(1, 51))
    assert all(b < a for a, b in zip(rg.values, rg.values[1:]))
    assert all(b > a for a, b in zip(rr.values, rr.values[1:]))
    assert rr.points[0][1] == Fraction(63, 201)
    assert round(float(rr.points[0][1]), 4) == 0.3134
    for n in (1, 10, 50):
        curve = analysis.cost_ratio_curves("T_RG", n=n)
        assert all(v == ref_rrsb(n) / ref_gsb(m) for m, v in curve.points)


def test_ratio_curve_errors():
    with pytest.raises(ValueError):
        analysis.cost_ratio_curves("T_XX")
    with pytest.raises(ValueError):
        analysis.cost_ratio_curves("T_RR", xs=[])
    with pytest.raises(ValueError):
        CostCurve("T_RR", "n", ((2, Fraction(1)), (1, Fraction(1))))


@pytest.mark.parametrize(
    "figure,n,name",
    [(2, 10, "fig2.csv"), (3, 1, "fig3_n1.csv"), (3, 10, "fig3_n10.csv"), (3, 50, "fig3_n50.csv"), (4, 10, "fig4.csv")],
)
def test_figures_match_goldens(figure, n, name):
    assert analysis.figure_csv(figure, n=n) == (GOLDEN / name).read_text()


def _rows(name):
    return list(csv.DictReader(io.StringIO((GOLDEN / name).read_text())))


def test_golden_fig2_against_reference_formulas():
    rows = _rows("fig2.csv")
    assert len(rows) == 100
    for r in rows:
        m = int(r["m"])
        assert int(r["LAB"]) == (m + 1) * 10**4
        assert int(r["GSB"]) == int(r["RRSB"]) == m + 1
        assert int(r["RSUB"]) == 2


@pytest.mark.parametrize("n", [1, 10, 50])
def test_golden_fig3_against_reference_formulas(n):
    for r in _rows(f"fig3_n{n}.csv"):
        m = int(r["m"])
        assert Fraction(r[f"T_RRSB_ms(n={n})"]) == ref_rrsb(n)
        assert Fraction(r["T_GSB_ms"]) == ref_gsb(m)
        assert abs(Fraction(r["T_RG"]) - ref_rrsb(n) / ref_gsb(m)) <= Fraction(1, 2 * 10**12)


def test_golden_fig4_against_reference_formulas():
    for r in _rows("fig4.csv"):
        n = int(r["n"])
        assert Fraction(r["T_RRSB_ms"]) == ref_rrsb(n)
        assert Fraction(r["T_RSUB_ms"]) == REF_RSUB
        assert abs(Fraction(r["T_RR"]) - ref_rrsb(n) / REF_RSUB) <= Fraction(1, 2 * 10**12)


def test_figure_csv_unknown_figure():
    with pytest.raises(ValueError):
        analysis.figure_csv(5)


@pytest.mark.parametrize(
    "protocol,search,expr,magnitude",
    [
        ("LAB", "linear", "O(N_obu·N_okey)", 1e11),
        ("LAB", "binary", "O(log(N_obu·N_okey))", math.log2(1e11)),
        ("GSB", "linear", "O(N_obu)", 1e7),
        ("GSB", "binary", "O(log(N_obu))", math.log2(1e7)),
        ("RSUB", "linear", "O(N_rsu+N_rkey)", 2e4),
        ("RSUB", "binary", "O(log(N_rsu·N_rkey))", math.log2(1e8)),
        ("RRSB", "linear", "O(N_obu)", 1e7),
        ("RRSB", "binary", "O(log(N_obu))", math.log2(1e7)),
    ],
)
def test_tracing_complexity_table(protocol, search, expr, magnitude):
    tc = analysis.tracing_complexity(protocol, search)
    assert tc.expression == expr
    assert tc.magnitude == pytest.approx(magnitude)


def test_tracing_complexity_rrsb_binary_is_about_23_comparisons():
    assert round(analysis.tracing_complexity("RRSB", "binary").magnitude) == 23
    with pytest.raises(UnknownProtocol):
        analysis.tracing_complexity("FOO", "linear")
    with pytest.raises(ValueError):
        analysis.tracing_complexity("RRSB", "hash")


def test_table5_lists_every_protocol():
    text = analysis.table5_text()
    for p in Protocol:
        assert f"{p.value}:" in text


def test_timing_summary():
    t = analysis.Timing.of([1.0, 2.0, 3.0, 4.0, 5.0])
    assert t.median == 3.0 and t.q1 == 2.0 and t.q3 == 4.0 and t.iqr == 2.0
    assert analysis.Timing.of([7.0]).median == 7.0


def test_bench_host_small_run_audits_cleanly():
    report = analysis.bench_host(iters=20, ring_sizes=(1, 3), verify_reps=3)
    assert [v.n for v in report.verify] == [1, 3]
    for v in report.verify:
        assert v.audit_ok and v.n_gt_exps == 2
        assert v.formula_delta_ms == pytest.approx(report.t_pmul.median - 2 * report.t_gtexp.median)
    assert "formula_delta_ms" in report.to_text()
    assert report.params.T_pmul > 0
