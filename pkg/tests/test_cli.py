"""CLI: verbs, flags, exit codes, CSV shape, reproducibility."""

import json
import subprocess
import sys

import numpy as np
import pytest

from chernoff import cli
from chernoff.quadrature import QuadratureBudgetError, QuadratureResult


def run_main(*argv):
    return cli.main(list(argv))


def run_proc(*argv):
    return subprocess.run([sys.executable, "-m", "chernoff.cli", *argv],
                          capture_output=True, text=True)


def test_help_exits_zero_every_verb():
    for args in (["--help"], ["tabulate", "--help"], ["verify", "--help"],
                 ["simulate", "--help"], ["compare", "--help"]):
        r = run_proc(*args)
        assert r.returncode == 0
        assert "--" in r.stdout


def test_unknown_flag_is_usage_error():
    r = run_proc("tabulate", "--which", "phi", "--from", "0", "--to", "1",
                 "--step", "0.5", "--frobnicate")
    assert r.returncode == 2


def test_missing_required_flag_is_usage_error():
    assert run_proc("tabulate").returncode == 2


def test_tabulate_chernoff_rows_and_mass(tmp_path):
    out = tmp_path / "fz.csv"
    rc = run_main("tabulate", "--which", "chernoff", "--from", "-3",
                  "--to", "3", "--step", "0.01", "--out", str(out))
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,f"
    assert len(lines) == 602  # header + 601 rows
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    mass = np.trapezoid(data[:, 1], data[:, 0])
    assert abs(mass - 1.0) < 1e-5
    assert out.read_text().endswith("\n")


def test_tabulate_phi_rows_positive(tmp_path):
    out = tmp_path / "phi.csv"
    assert run_main("tabulate", "--which", "phi", "--from", "-2", "--to", "2",
                    "--step", "0.5", "--out", str(out)) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 10
    assert all(float(ln.split(",")[1]) > 0.0 for ln in lines[1:])


def test_tabulate_h_laplace_mass(tmp_path):
    from chernoff import airy
    out = tmp_path / "h.csv"
    assert run_main("tabulate", "--which", "h", "--x", "-1", "--from", "0.02",
                    "--to", "8.0", "--step", "0.02", "--out", str(out)) == 0
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    mass = np.trapezoid(data[:, 1], data[:, 0])
    target = float(np.exp(airy.log_ai_many(np.array([4.0 ** (1 / 3) + 0j]))
                          - airy.log_ai_many(np.array([0j])))[0].real)
    assert abs(mass - target) < 1e-3


def test_tabulate_joint2_columns(tmp_path):
    out = tmp_path / "j2.csv"
    assert run_main("tabulate", "--which", "joint2", "--from", "-1", "--to", "1",
                    "--step", "0.5", "--a-from", "0.5", "--a-to", "1.5",
                    "--a-step", "0.5", "--out", str(out)) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,a,f"
    assert len(lines) == 1 + 5 * 3


def test_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ("tabulate", "--which", "firstpassage", "--s", "0", "--x", "-1",
            "--from", "0.1", "--to", "3.0", "--step", "0.1")
    assert run_main(*args, "--out", str(a)) == 0
    assert run_main(*args, "--out", str(b)) == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_deterministic_and_csv(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ("simulate", "--what", "purebm", "--paths", "20000", "--dt", "2e-3",
            "--seed", "7", "--threads", "2")
    assert run_main(*args, "--out", str(a)) == 0
    assert run_main(*args, "--out", str(b)) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "value,count"


def test_simulate_argmax_samples(tmp_path):
    out = tmp_path / "s.csv"
    assert run_main("simulate", "--what", "argmax", "--paths", "2000",
                    "--dt", "4e-3", "--seed", "3", "--out", str(out)) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "value" and len(lines) == 2001


def test_compare_hitting_ok():
    assert run_main("compare", "--target", "hitting", "--paths", "30000",
                    "--dt", "1e-3", "--seed", "2", "--threads", "2") == 0


def test_verify_identities_subprocess_deterministic():
    r1 = run_proc("verify", "--suite", "airy")
    r2 = run_proc("verify", "--suite", "airy")
    strip = lambda s: "\n".join(
        ln.split("(")[0] for ln in s.splitlines())  # drop runtime_ms column
    assert r1.returncode == 0
    assert strip(r1.stdout) == strip(r2.stdout)


def test_verify_report_file(tmp_path):
    out = tmp_path / "report.ndjson"
    rc = run_main("verify", "--suite", "airy", "--report", str(out))
    assert rc == 0
    recs = [json.loads(ln) for ln in out.read_text().splitlines()]
    assert all(rec["passed"] for rec in recs)


def test_verify_mc_suite_small(tmp_path):
    out = tmp_path / "mc.ndjson"
    rc = run_main("verify", "--suite", "mc", "--paths", "20000", "--seed", "7",
                  "--threads", "2", "--report", str(out))
    recs = [json.loads(ln) for ln in out.read_text().splitlines()]
    names = {r["name"] for r in recs}
    assert names == {"mc_argmax_ks", "mc_hitting_prob_0_-1",
                     "mc_purebm_chi2_pvalue"}
    assert rc == (0 if all(r["passed"] for r in recs) else 1)


def test_verify_strict_failure_exit_code():
    # the exit code must mirror the strict-profile pass/fail outcome
    from chernoff import verify
    rc = run_main("verify", "--suite", "airy", "--strict")
    expected = 0 if all(r.passed for r in
                        verify.run_all("strict", ("airy",))) else 1
    assert rc == expected


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise QuadratureBudgetError(QuadratureResult(0.0, 1.0, 10, 1.0))
    monkeypatch.setattr(cli.dens, "phi", boom)
    out = tmp_path / "x.csv"
    rc = run_main("tabulate", "--which", "phi", "--from", "0", "--to", "1",
                  "--step", "0.5", "--out", str(out))
    assert rc == 3
    assert not out.exists()  # no partial file left behind
