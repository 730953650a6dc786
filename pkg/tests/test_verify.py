"""Verification harness: reports, profiles, reproducibility."""

import json

import numpy as np
import pytest

from chernoff import verify
from chernoff.verify import CheckReport, run_all, summarize, to_ndjson


def _payload(r: CheckReport):
    # everything except wall-clock runtime
    return (r.name, r.target, r.computed, r.abs_err, r.tol, r.passed)


def test_airy_suite_passes_and_reproduces():
    a = run_all(suites=("airy",))
    b = run_all(suites=("airy",))
    assert all(r.passed for r in a)
    assert [_payload(r) for r in a] == [_payload(r) for r in b]


def test_report_invariant_passed_iff_within_tol():
    for r in run_all(suites=("airy",)):
        assert r.passed == (r.abs_err <= r.tol)
        assert r.runtime_ms >= 0


def test_unit_mass_check_and_tolerance_monotonicity():
    r = verify.check_airy_inverse_square_mass()
    assert r.passed and r.abs_err < 1e-8
    # looser tolerance keeps passing
    r6 = verify.check_airy_inverse_square_mass(profile=100.0)
    assert r6.passed and r6.tol == pytest.approx(1e-6)


def test_psi_phi_and_laplace_names_present():
    reports = run_all(suites=("identities",))
    names = {r.name for r in reports}
    assert "airy_inverse_square_mass" in names
    assert any(n.startswith("master_relation") for n in names)
    assert any(n.startswith("psi_phi") for n in names)
    assert any(n.startswith("laplace_roundtrip") for n in names)
    assert any(n.startswith("survival_limit") for n in names)
    assert "moment_relation" in names
    assert all(r.passed for r in reports), summarize(reports)


def test_pde_suite_orders():
    reports = run_all(suites=("pde",))
    by_name = {r.name: r for r in reports}
    for key in ("pde_residual_order_f", "pde_residual_order_g"):
        assert 1.7 <= by_name[key].computed <= 2.3
        assert by_name[key].passed
    assert by_name["pde_tilt_identity"].abs_err < 1e-10


def test_empty_selection_rejected():
    with pytest.raises(ValueError, match="no checks selected"):
        run_all(suites=())
    with pytest.raises(ValueError):
        run_all(suites=("bogus",))
    with pytest.raises(ValueError):
        run_all(profile="nonsense", suites=("airy",))
    with pytest.raises(ValueError):
        run_all(profile=-1.0, suites=("airy",))


def test_strict_profile_honest_failures():
    reports = run_all(profile="strict", suites=("airy",))
    # tolerances scaled down 100x; failures (if any) must be flagged, and the
    # wronskian headroom is wide enough to survive
    for r in reports:
        assert r.passed == (r.abs_err <= r.tol)
    assert {r.name: r for r in reports}["airy_wronskian_1000pts"].passed


def test_ndjson_round_trip():
    reports = run_all(suites=("airy",))
    text = to_ndjson(reports)
    assert text.endswith("\n")
    lines = text.strip().split("\n")
    assert len(lines) == len(reports)
    rec = json.loads(lines[0])
    assert set(rec) == {"name", "target", "computed", "abs_err", "tol",
                        "passed", "runtime_ms"}


def test_summary_counts_failures():
    reports = [CheckReport("a", 0.0, 0.0, 0.0, 1.0, True, 1),
               CheckReport("b", 0.0, 1.0, 1.0, 0.5, False, 1)]
    text = summarize(reports)
    assert "2 checks, 1 failed" in text
    assert "FAIL" in text and "PASS" in text
