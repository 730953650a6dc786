"""Command-line interface: tabulate densities, run verification suites,
run simulations, and compare quadrature against Monte Carlo.

Exit codes: 0 success, 1 check/concordance failure, 2 usage error,
3 numerical failure.  Output files are written atomically after all values
are computed, so a numerical failure leaves no partial file behind; stdout
is deterministic for identical invocations (wall-clock notes go to stderr).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from . import densities as dens
from . import mcsim, verify
from .airy import AiryOverflowError
from .densities import ProbabilityRangeError, StartState
from .quadrature import QuadratureBudgetError, QuadratureSpec

_NUMERICAL_ERRORS = (QuadratureBudgetError, AiryOverflowError,
                     ProbabilityRangeError, ArithmeticError, OverflowError)


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("CHERNOFF_THREADS", "1")))
    except ValueError:
        return 1


class _UsageError(ValueError):
    pass


def _grid(args) -> np.ndarray:
    if args.step <= 0 or args.to <= getattr(args, "from"):
        raise _UsageError("need step > 0 and --to > --from")
    n = int(round((args.to - getattr(args, "from")) / args.step))
    g = getattr(args, "from") + args.step * np.arange(n + 1)
    return g[g <= args.to + 1e-12 * max(1.0, abs(args.to))]


def _write_out(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        tmp = path + ".part"
        with open(tmp, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)


def _fmt_rows(header: str, rows) -> str:
    lines = [header]
    for row in rows:
        lines.append(",".join("%.17g" % v for v in row))
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------------
# tabulate
# ----------------------------------------------------------------------------

def cmd_tabulate(args) -> int:
    spec = QuadratureSpec(abs_tol=args.abs_tol, rel_tol=args.rel_tol)
    which = args.which
    try:
        if which == "chernoff":
            table = dens.tabulate("argmax", _grid(args), spec)
            text = _fmt_rows("t,f", zip(table.grid, table.values))
        elif which == "max2":
            table = dens.tabulate("joint_marginal", _grid(args), spec)
            text = _fmt_rows("a,f", zip(table.grid, table.values))
        elif which == "firstpassage":
            st = StartState(args.s, args.x)
            table = dens.tabulate("first_passage", _grid(args), spec, state=st)
            text = _fmt_rows("t,f", zip(table.grid, table.values))
        elif which == "phi":
            g = _grid(args)
            text = _fmt_rows("t,f", ((t, dens.phi(float(t), spec)) for t in g))
        elif which == "h":
            if args.x >= 0:
                print("tabulate --which h needs --x < 0", file=sys.stderr)
                return 2
            g = _grid(args)
            if np.any(g <= 0):
                print("h grid must be positive", file=sys.stderr)
                return 2
            vals = dens._h_shift(-dens.FOUR13 * args.x, g)
            text = _fmt_rows("t,f", zip(g, vals))
        elif which == "joint2":
            g = _grid(args)
            aa = np.arange(args.a_from, args.a_to + args.a_step / 2, args.a_step)
            rows = [(t, a, dens.joint_density_two_sided(float(t), float(a)))
                    for t in g for a in aa if a > 0]
            text = _fmt_rows("t,a,f", rows)
        else:  # pragma: no cover - argparse restricts choices
            return 2
    except _NUMERICAL_ERRORS as exc:
        print("numerical failure: %s" % exc, file=sys.stderr)
        return 3
    _write_out(args.out, text)
    return 0


# ----------------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------------

def _mc_reports(paths: int, seed: int, threads: int) -> list[verify.CheckReport]:
    """Monte Carlo concordance checks (argmax KS, hitting, pure-BM chi2)."""
    reports = []
    t0 = time.perf_counter()
    cfg = mcsim.McConfig(n_paths=paths, dt=5e-4, t_max=4.0, seed=seed,
                         threads=threads)
    sample = mcsim.simulate_two_sided(cfg)
    ks = mcsim.ks_statistic(sample.argmax, dens.chernoff_cdf)
    bound = 1.63 / math.sqrt(paths) + 0.003
    reports.append(verify.CheckReport(
        "mc_argmax_ks", 0.0, ks, ks, bound, bool(ks <= bound),
        int(1000 * (time.perf_counter() - t0))))

    t0 = time.perf_counter()
    st = StartState(0.0, -1.0)
    est = mcsim.estimate_hitting_prob(st, cfg)
    target = dens.hitting_prob(st)
    err = abs(est.probability - target)
    reports.append(verify.CheckReport(
        "mc_hitting_prob_0_-1", target, est.probability, err,
        3.0 * est.std_error, bool(err <= 3.0 * est.std_error),
        int(1000 * (time.perf_counter() - t0))))

    t0 = time.perf_counter()
    hist = mcsim.simulate_pure_bm_passage(1.0, cfg)
    masses = np.diff(dens.bm_first_passage_cdf(1.0, hist.edges))
    tail = 1.0 - float(dens.bm_first_passage_cdf(1.0, np.asarray([hist.edges[-1]]))[0])
    obs = np.concatenate([hist.counts, [hist.censored]]).astype(float)
    expc = hist.n_paths * np.concatenate([masses, [tail]])
    chi2 = float(((obs - expc) ** 2 / expc).sum())
    from scipy.special import gammaincc
    pval = float(gammaincc((obs.size - 1) / 2.0, chi2 / 2.0))
    reports.append(verify.CheckReport(
        "mc_purebm_chi2_pvalue", 1.0, pval, chi2, 0.001,
        bool(pval > 0.001), int(1000 * (time.perf_counter() - t0))))
    return reports


def cmd_verify(args) -> int:
    profile = "strict" if args.strict else "default"
    suites = {"all": ("airy", "identities", "pde"),
              "airy": ("airy",), "identities": ("identities",),
              "pde": ("pde",), "mc": ()}[args.suite]
    try:
        reports = list(verify.run_all(profile, suites)) if suites else []
        if args.suite in ("all", "mc"):
            reports += _mc_reports(args.paths, args.seed, args.threads)
    except _NUMERICAL_ERRORS as exc:
        print("numerical failure: %s" % exc, file=sys.stderr)
        return 3
    print(verify.summarize(reports))
    if args.report:
        _write_out(args.report, verify.to_ndjson(reports))
    return 0 if all(r.passed for r in reports) else 1


# ----------------------------------------------------------------------------
# simulate
# ----------------------------------------------------------------------------

def _mc_config(args) -> mcsim.McConfig:
    return mcsim.McConfig(n_paths=args.paths, dt=args.dt, t_max=args.tmax,
                          seed=args.seed,
                          bridge_correction=not args.no_bridge,
                          threads=args.threads)


def cmd_simulate(args) -> int:
    cfg = _mc_config(args)
    if args.what in ("argmax", "max"):
        sample = mcsim.simulate_two_sided(cfg)
        vals = sample.argmax if args.what == "argmax" else sample.max
        text = _fmt_rows("value", ((v,) for v in vals))
    else:  # purebm
        hist = mcsim.simulate_pure_bm_passage(args.z, cfg)
        text = _fmt_rows("value,count",
                         zip(hist.edges[:-1], hist.counts.astype(float)))
    _write_out(args.out, text)
    return 0


# ----------------------------------------------------------------------------
# compare
# ----------------------------------------------------------------------------

def cmd_compare(args) -> int:
    cfg = _mc_config(args)
    ok = True
    if args.target == "argmax":
        sample = mcsim.simulate_two_sided(cfg)
        ks = mcsim.ks_statistic(sample.argmax, dens.chernoff_cdf)
        bound = 1.63 / math.sqrt(cfg.n_paths) + 0.003
        ok = ks <= bound
        print("argmax: KS=%.6f bound=%.6f paths=%d -> %s"
              % (ks, bound, cfg.n_paths, "OK" if ok else "FAIL"))
    elif args.target == "hitting":
        st = StartState(args.s, args.x)
        est = mcsim.estimate_hitting_prob(st, cfg)
        target = dens.hitting_prob(st)
        z = (est.probability - target) / est.std_error
        ok = abs(z) <= 3.0
        print("hitting(%g,%g): quadrature=%.6f mc=%.6f +- %.6f z=%+.2f -> %s"
              % (st.s, st.x, target, est.probability, est.std_error, z,
                 "OK" if ok else "FAIL"))
    else:  # max: one-sided from (0, 0), histogram bins around the a grid
        st = StartState(0.0, 0.0)
        sample = mcsim.simulate_one_sided(st, cfg)
        width = args.bin_width
        for a in (0.2, 0.5, 1.0):
            lo, hi = a - width / 2.0, a + width / 2.0
            p_hat = float(np.mean((sample.max >= lo) & (sample.max < hi)))
            se = math.sqrt(max(p_hat * (1 - p_hat), 1e-12) / cfg.n_paths)
            dens_vals = [dens.max_density_one_sided(v, st)
                         for v in (lo, a, hi)]
            p_exp = (dens_vals[0] + 4 * dens_vals[1] + dens_vals[2]) / 6.0 * width
            z = (p_hat - p_exp) / se if se else 0.0
            point_ok = abs(z) <= 3.0
            ok = ok and point_ok
            print("max@%.1f: quadrature=%.6f mc=%.6f +- %.6f z=%+.2f -> %s"
                  % (a, p_exp, p_hat, se, z, "OK" if point_ok else "FAIL"))
    return 0 if ok else 1


# ----------------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------------

def _add_mc_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--paths", type=int, default=100000)
    p.add_argument("--dt", type=float, default=5e-4)
    p.add_argument("--tmax", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--no-bridge", action="store_true",
                   help="disable bridge crossing/max sampling")
    p.add_argument("--threads", type=int, default=_default_threads())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="chernoff",
        description="Distributions of the max/argmax of Brownian motion "
                    "minus a parabola: tabulation, verification, simulation.")
    sub = ap.add_subparsers(dest="verb", required=True)

    t = sub.add_parser("tabulate", help="write a density table as CSV")
    t.add_argument("--which", required=True,
                   choices=["chernoff", "max2", "joint2", "firstpassage",
                            "phi", "h"])
    t.add_argument("--from", type=float, required=True)
    t.add_argument("--to", type=float, required=True)
    t.add_argument("--step", type=float, required=True)
    t.add_argument("--a-from", type=float, default=0.1)
    t.add_argument("--a-to", type=float, default=3.0)
    t.add_argument("--a-step", type=float, default=0.1)
    t.add_argument("--s", type=float, default=0.0, help="start time")
    t.add_argument("--x", type=float, default=-1.0, help="start level")
    t.add_argument("--abs-tol", type=float, default=1e-10)
    t.add_argument("--rel-tol", type=float, default=1e-8)
    t.add_argument("--out", default=None)
    t.set_defaults(func=cmd_tabulate)

    v = sub.add_parser("verify", help="run the verification checks")
    v.add_argument("--suite", default="all",
                   choices=["all", "airy", "identities", "pde", "mc"])
    v.add_argument("--strict", action="store_true",
                   help="divide every tolerance by 100")
    v.add_argument("--paths", type=int, default=100000)
    v.add_argument("--seed", type=int, default=1)
    v.add_argument("--threads", type=int, default=_default_threads())
    v.add_argument("--report", default=None,
                   help="write line-delimited JSON records here")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", help="run the Monte Carlo oracle")
    s.add_argument("--what", required=True, choices=["argmax", "max", "purebm"])
    s.add_argument("--z", type=float, default=1.0,
                   help="start level for purebm")
    s.add_argument("--out", default=None)
    _add_mc_flags(s)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("compare", help="quadrature vs Monte Carlo")
    c.add_argument("--target", required=True,
                   choices=["argmax", "max", "hitting"])
    c.add_argument("--s", type=float, default=0.0)
    c.add_argument("--x", type=float, default=-1.0)
    c.add_argument("--bin-width", type=float, default=0.1)
    _add_mc_flags(c)
    c.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.time()
    try:
        code = args.func(args)
    except _UsageError as exc:
        print("usage error: %s" % exc, file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        print("numerical failure: %s" % exc, file=sys.stderr)
        return 3
    print("elapsed %.1f s" % (time.time() - t0), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
