"""Distributions for Brownian motion with parabolic drift ``W(t) - t^2``.

Everything here reduces to three ingredients:

* ``h``      -- the exponentially tilted first-passage kernel, recovered by
  inverting its Airy-ratio Laplace transform
  ``Ai(2^{-1/3} lam - 4^{1/3} x) / Ai(2^{-1/3} lam)``;
* ``g``      -- the tilted survival functional, an absolutely convergent
  double integral of ``Ai(iu+y)/Ai(iu)^2`` along the imaginary axis;
* ``phi``    -- the barrier-derivative transform
  ``(1/(4^{1/3} pi)) int e^{-itv} / Ai(i 2^{-1/3} v) dv``.

From these: hitting and survival probabilities from any start state
(s, x <= 0), densities of the maximum and its location for the one- and
two-sided processes, and the argmax density ``f_Z(t) = phi(t) phi(-t)/2``.

Laplace inversion runs on two routes that cross-validate each other:
a fixed-Talbot contour (small times) and the residue series over Airy zeros
(times >= ~0.9, where it converges to machine precision).  The direct
Fourier form along the imaginary axis is kept as a slow reference
(`h_density_fourier`) -- it is how the transform is defined, but its
integrand only decays like ``exp(-c sqrt(u))``, so it serves as an oracle
rather than a workhorse.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import erfc

from . import airy
from .quadrature import (
    QuadratureSpec,
    QuadratureResult,
    airy_ratio_tail_bound,
    gauss_legendre_panels,
    integrate_interval,
    integrate_real_line,
    integrate_semi_infinite,
)

__all__ = [
    "StartState",
    "DensityTable",
    "ProbabilityRangeError",
    "StepDegeneracyError",
    "h_density",
    "h_density_fourier",
    "h_laplace_transform",
    "hitting_prob",
    "survival_prob",
    "g_fun",
    "tilted_g",
    "tilted_g_limit",
    "phi",
    "k_at_barrier",
    "chernoff_density",
    "chernoff_cdf",
    "psi",
    "joint_density_one_sided",
    "max_density_one_sided",
    "joint_density_two_sided",
    "max_marginal_two_sided",
    "bm_first_passage_density",
    "bm_first_passage_cdf",
    "argmax_second_moment",
    "max_mean_two_sided",
    "tabulate",
]

TWO13 = 2.0 ** (1.0 / 3.0)
FOUR13 = 2.0 ** (2.0 / 3.0)

_TALBOT_M = 30
_RESIDUE_T_MIN = 0.9
_N_ZEROS = 56
_H_ERR = 2e-10  # validated pointwise accuracy scale of the h inversion


class ProbabilityRangeError(ArithmeticError):
    """A quantity that must be a probability fell outside [0, 1] by more
    than its error estimate."""


class StepDegeneracyError(ValueError):
    """Finite-difference stencil would cross the barrier x = 0."""


@dataclass(frozen=True)
class StartState:
    """Start time s and start level x <= 0 of the drifted process."""

    s: float
    x: float

    def __post_init__(self):
        if not (math.isfinite(self.s) and math.isfinite(self.x)):
            raise ValueError("non-finite start state")
        if self.x > 0.0:
            raise ValueError("start level must satisfy x <= 0")

    @property
    def shift(self) -> float:
        """Airy-argument shift -4^{1/3} x >= 0."""
        return -FOUR13 * self.x


def _as_probability(value: float, err: float, what: str) -> float:
    slack = max(err, 1e-12) * 10.0 + 5e-9
    if value < -slack or value > 1.0 + slack:
        raise ProbabilityRangeError(
            "%s = %.6e outside [0,1] beyond error budget %.1e" % (what, value, slack))
    if value < 0.0 or value > 1.0:
        warnings.warn("clamped %s = %.3e into [0,1]" % (what, value),
                      RuntimeWarning, stacklevel=3)
        return min(1.0, max(0.0, value))
    return value


# ----------------------------------------------------------------------------
# h: inversion of the Airy-ratio Laplace transform
# ----------------------------------------------------------------------------

def h_laplace_transform(x: float, lam: float) -> float:
    """Ai(2^{-1/3} lam - 4^{1/3} x)/Ai(2^{-1/3} lam) for lam > 0."""
    xi = 2.0 ** (-1.0 / 3.0) * lam
    return float(np.exp(airy.log_ai_diff(np.asarray([xi + 0j]), -FOUR13 * x))[0].real)


@lru_cache(maxsize=1)
def _residue_data():
    zeros = airy.airy_zeros(_N_ZEROS)
    aip = airy.airy_many(zeros.astype(np.complex128))[1].real
    return zeros, aip


def _h_residue(a: float, ts: np.ndarray) -> np.ndarray:
    """Residue (spectral) series; accurate for t >= ~0.8."""
    zeros, aip = _residue_data()
    num = airy.airy_many((zeros + a).astype(np.complex128))[0].real
    coef = TWO13 * num / aip
    return np.exp(TWO13 * np.outer(ts, zeros)) @ coef


_TH = np.arange(1, _TALBOT_M) * math.pi / _TALBOT_M
_COT = 1.0 / np.tan(_TH)
_TALBOT_S = _TH * (_COT + 1j)                       # contour / r
_TALBOT_SIG = _TH + (_TH * _COT - 1.0) * _COT       # correction factor


def _h_talbot(a: float, ts: np.ndarray) -> np.ndarray:
    """Fixed-Talbot inversion, vectorized over times."""
    ts = np.asarray(ts, dtype=np.float64)
    r = 2.0 * _TALBOT_M / (5.0 * ts)
    lam = r[:, None] * _TALBOT_S[None, :]
    xi = 2.0 ** (-1.0 / 3.0) * lam
    expo = ts[:, None] * lam + airy.log_ai_diff(xi, a)
    terms = (np.exp(expo) * (1.0 + 1j * _TALBOT_SIG[None, :])).real.sum(axis=1)
    xi0 = (2.0 ** (-1.0 / 3.0) * r).astype(np.complex128)
    head = 0.5 * np.exp(ts * r + airy.log_ai_diff(xi0, a).real)
    return (r / _TALBOT_M) * (head + terms)


def _h_shift(a: float, ts: np.ndarray) -> np.ndarray:
    """h with Airy shift a = -4^{1/3} x, vectorized over t > 0."""
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    out = np.zeros(ts.shape)
    pos = ts > 0.0
    small = pos & (ts < _RESIDUE_T_MIN)
    large = pos & ~small
    if small.any():
        out[small] = _h_talbot(a, ts[small])
    if large.any():
        out[large] = _h_residue(a, ts[large])
    return out


def _h_over_shifts(a_arr: np.ndarray, t: float) -> np.ndarray:
    """h at one time for an array of shifts (outer integrals over x)."""
    a_arr = np.asarray(a_arr, dtype=np.float64)
    if t <= 0.0:
        return np.zeros(a_arr.shape)
    if t >= _RESIDUE_T_MIN:
        zeros, aip = _residue_data()
        args = (zeros[None, :] + a_arr[:, None]).astype(np.complex128)
        num = airy.airy_many(args.ravel())[0].real.reshape(args.shape)
        return (num / aip[None, :] * TWO13) @ np.exp(TWO13 * t * zeros)
    r = 2.0 * _TALBOT_M / (5.0 * t)
    lam = r * _TALBOT_S
    xi = 2.0 ** (-1.0 / 3.0) * lam
    expo = t * lam[None, :] + airy.log_ai_diff(
        np.broadcast_to(xi, (a_arr.size, xi.size)), a_arr[:, None])
    terms = (np.exp(expo) * (1.0 + 1j * _TALBOT_SIG[None, :])).real.sum(axis=1)
    xi0 = np.full(a_arr.shape, 2.0 ** (-1.0 / 3.0) * r, dtype=np.complex128)
    head = 0.5 * np.exp(t * r + airy.log_ai_diff(xi0, a_arr).real)
    return (r / _TALBOT_M) * (head + terms)


def h_density(x: float, t: float) -> float:
    """Tilted first-passage kernel h_x(t); requires x < 0, t > 0.

    ``exp(-(2/3)(t^3 - s^3) + 2 s x) h_x(t - s)`` is the density of the
    passage time through 0 from (s, x).
    """
    if not x < 0.0:
        raise ValueError("h_density requires x < 0")
    if not t > 0.0:
        raise ValueError("h_density requires t > 0")
    return float(_h_shift(-FOUR13 * x, np.asarray([t]))[0])


def h_density_fourier(x: float, t: float,
                      spec: QuadratureSpec | None = None) -> QuadratureResult:
    """Reference evaluation of h straight from its Fourier form.

    Slow (integrand decays like exp(-c sqrt(u))); used to cross-check the
    contour inversions at modest tolerances.
    """
    if not (x < 0.0 and t > 0.0):
        raise ValueError("requires x < 0, t > 0")
    a = -FOUR13 * x
    spec = spec or QuadratureSpec(abs_tol=1e-5, rel_tol=1e-6,
                                  max_subdivisions=65536)
    c = a / math.sqrt(2.0)

    def f(u):
        zu = 1j * u
        return (TWO13 / (2.0 * math.pi)) * np.exp(
            1j * TWO13 * t * u + airy.log_ai_diff(zu, a))

    def decay(U):
        su = math.sqrt(U)
        return (TWO13 / math.pi) * 2.0 * (su / c + 1.0 / c ** 2) * math.exp(-c * su)

    return integrate_real_line(f, decay, spec, frequency=TWO13 * t)


# ----------------------------------------------------------------------------
# Hitting probability: outer time integral of h
# ----------------------------------------------------------------------------

def _cubic_gap(s: float, tau) -> np.ndarray:
    """(2/3)((s+tau)^3 - s^3), computed without cancellation."""
    tau = np.asarray(tau, dtype=np.float64)
    return (2.0 / 3.0) * tau * (3.0 * s * s + 3.0 * s * tau + tau * tau)


def hitting_prob(state: StartState, spec: QuadratureSpec | None = None) -> float:
    """Probability that the process from (s, x) ever reaches the barrier.

    Absolutely convergent route: the time integral of the passage density
    ``exp(-(2/3)((s+tau)^3 - s^3) + 2 s x) h_x(tau)``.
    """
    if state.x == 0.0:
        return 1.0
    spec = spec or QuadratureSpec(abs_tol=1e-11, rel_tol=1e-9)
    s, x = state.s, state.x
    a = state.shift
    zeros, aip = _residue_data()
    lead = TWO13 * abs(float(
        airy.airy_many(np.asarray([zeros[0] + a + 0j]))[0][0].real / aip[0]))
    hbar = 2.0 * (1.0 + lead)

    def decay(T):
        body = 2.0 * s * x - _cubic_gap(s, T)
        if body > 690.0:
            return math.inf
        return hbar * math.exp(body) / (2.0 * max(s + T, 1.0) ** 2)

    lo = max(1.0, 1.5 - s)
    T, hi = lo, 60.0
    if decay(lo) > spec.abs_tol / 2.0:
        for _ in range(60):  # continuous in (s, x): finite differences stay smooth
            T = 0.5 * (lo + hi)
            if decay(T) > spec.abs_tol / 2.0:
                lo = T
            else:
                hi = T
        T = hi

    def f(tau):
        return np.exp(2.0 * s * x - _cubic_gap(s, tau)) * _h_shift(a, tau)

    res = integrate_semi_infinite(
        f, decay, dataclasses.replace(spec, truncation_halfwidth=T))
    err = res.err_estimate + _H_ERR * T
    return _as_probability(res.value.real, err, "hitting_prob%s" % (state,))


def f_tilted(state: StartState, spec: QuadratureSpec | None = None) -> float:
    """f(s,x) = exp(-2sx - (2/3)s^3) * hitting probability (the tilted
    hitting functional satisfying the parabolic PDE)."""
    p = hitting_prob(state, spec)
    return math.exp(-2.0 * state.s * state.x - (2.0 / 3.0) * state.s ** 3) * p


# ----------------------------------------------------------------------------
# g: tilted survival functional
# ----------------------------------------------------------------------------

def _y_cap(s: float, budget: float = 55.0) -> float:
    """Upper y beyond which exp(-2^{1/3} s y) Ai(iu+y) is negligible."""
    drive = TWO13 * max(0.0, -s)
    y = 9.0
    for _ in range(80):
        y_new = (1.5 * (budget + drive * y)) ** (2.0 / 3.0)
        if abs(y_new - y) < 1e-9:
            break
        y = y_new
    return max(3.0, y)


def tilted_g(s: float, barrier_width: float | None,
             spec: QuadratureSpec | None = None) -> QuadratureResult:
    """(1/2pi) int du [int_0^A exp(-2^{1/3} s (iu+y)) Ai(iu+y) dy] / Ai(iu)^2.

    This equals exp(2sx) g(s, x) for A = -4^{1/3} x; ``barrier_width=None``
    takes A = infinity, which is the Laplace-limit function p(s).
    """
    spec = spec or QuadratureSpec(abs_tol=1e-10, rel_tol=1e-9)
    cap = _y_cap(s, budget=55.0)
    A = cap if barrier_width is None else min(float(barrier_width), cap)
    if A <= 0.0:
        return QuadratureResult(0.0, 0.0, 0, 0.0)
    y_pts, y_wts = gauss_legendre_panels(0.0, A, nodes_per_unit=32)

    def outer(u):
        zu = 1j * u
        ldiff = airy.log_ai_diff(zu[:, None], y_pts[None, :])
        base = airy.log_ai_many(zu)
        expo = (ldiff - base[:, None]
                - TWO13 * s * (zu[:, None] + y_pts[None, :]))
        return (np.exp(expo) @ y_wts) / (2.0 * math.pi)

    grow = math.exp(TWO13 * max(0.0, -s) * A) * max(A, 1.0)
    base_bound = airy_ratio_tail_bound(A)

    def decay(U):
        return grow * base_bound(U) / (2.0 * math.pi)

    return integrate_real_line(outer, decay, spec, frequency=TWO13 * abs(s))


def survival_prob(state: StartState, spec: QuadratureSpec | None = None) -> float:
    """Probability of never reaching the barrier from (s, x):
    exp(2sx + (2/3)s^3) g(s, x)."""
    if state.x == 0.0:
        return 0.0
    res = tilted_g(state.s, state.shift, spec)
    val = math.exp((2.0 / 3.0) * state.s ** 3) * res.value.real
    err = math.exp((2.0 / 3.0) * state.s ** 3) * res.err_estimate
    return _as_probability(val, err, "survival_prob%s" % (state,))


def g_fun(state: StartState, spec: QuadratureSpec | None = None) -> float:
    """The survival integrand g(s, x) itself (exp(-2sx) times tilted_g)."""
    pref = -2.0 * state.s * state.x
    if pref > 690.0:
        raise OverflowError("exp(-2sx) overflows; use survival_prob/tilted_g")
    return math.exp(pref) * tilted_g(state.s, state.shift, spec).value.real


def tilted_g_limit(s: float, spec: QuadratureSpec | None = None) -> float:
    """p(s): the barrier-width -> infinity limit of tilted_g.  Equals
    exp(-(2/3) s^3)."""
    return tilted_g(s, None, spec).value.real


# ----------------------------------------------------------------------------
# phi and the argmax density
# ----------------------------------------------------------------------------

def phi(t: float, spec: QuadratureSpec | None = None) -> float:
    """phi(t) = (1/(4^{1/3} pi)) int e^{-itv} / Ai(i 2^{-1/3} v) dv."""
    spec = spec or QuadratureSpec(abs_tol=1e-11, rel_tol=1e-9)
    t = float(t)

    def f(u):
        return np.exp(-1j * TWO13 * t * u - airy.log_ai_many(1j * u)) \
            * (2.0 ** (-1.0 / 3.0) / math.pi)

    res = integrate_real_line(f, airy_ratio_tail_bound(0.0), spec,
                              frequency=TWO13 * abs(t))
    if abs(res.value.imag) > 10.0 * res.err_estimate + 1e-12:
        raise ArithmeticError("phi(%g): imaginary residue %.2e" % (t, res.value.imag))
    return float(res.value.real)


def k_at_barrier(s: float) -> float:
    """k(s, 0) = exp((2/3) s^3) phi(s): barrier derivative of the hitting
    probability."""
    return math.exp((2.0 / 3.0) * s ** 3) * phi(s)


_PHI_DOMAIN = 4.8


@lru_cache(maxsize=1)
def _phi_interp():
    """Chebyshev model of phi on [-4.8, 4.8] built from one shared
    Airy-weight grid (the transform weight 1/Ai(iu) does not depend on t)."""
    U = 19.0
    width = math.pi / (4.0 * TWO13 * _PHI_DOMAIN)
    n_pan = int(math.ceil(2.0 * U / width))
    x15, w15 = np.polynomial.legendre.leggauss(15)
    edges = np.linspace(-U, U, n_pan + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    pts = (0.5 * (lo + hi) + 0.5 * (hi - lo) * x15[None, :]).ravel()
    wts = (0.5 * (hi - lo) * np.broadcast_to(w15, (n_pan, 15))).ravel()
    wvals = np.exp(-airy.log_ai_many(1j * pts)) * wts * (2.0 ** (-1.0 / 3.0) / math.pi)

    def phi_vec(tarr):
        ph = np.exp(-1j * TWO13 * np.asarray(tarr)[:, None] * pts[None, :])
        return (ph @ wvals).real

    deg = 140
    cheb = np.polynomial.chebyshev.Chebyshev.interpolate(
        phi_vec, deg, domain=[-_PHI_DOMAIN, _PHI_DOMAIN])
    return cheb


def _phi_fast(tarr) -> np.ndarray:
    tarr = np.asarray(tarr, dtype=np.float64)
    if np.any(np.abs(tarr) > _PHI_DOMAIN):
        raise ValueError("cached phi domain is |t| <= %.1f" % _PHI_DOMAIN)
    return _phi_interp()(tarr)


def chernoff_density(t: float) -> float:
    """Density of the argmax of two-sided W(t) - t^2:
    f_Z(t) = phi(t) phi(-t) / 2."""
    return 0.5 * phi(t) * phi(-t)


def _fz_fast(tarr) -> np.ndarray:
    tarr = np.asarray(tarr, dtype=np.float64)
    return 0.5 * _phi_fast(tarr) * _phi_fast(-tarr)


@lru_cache(maxsize=1)
def _fz_cdf_interp():
    """Antiderivative of the cached argmax density; F(-4.8) ~ 0."""
    integ = np.polynomial.chebyshev.Chebyshev.interpolate(
        _fz_fast, 160, domain=[-_PHI_DOMAIN, _PHI_DOMAIN]).integ()
    return integ - integ(-_PHI_DOMAIN)


def chernoff_cdf(t) -> np.ndarray:
    """CDF of the argmax law, from the cached Chebyshev antiderivative."""
    t = np.asarray(t, dtype=np.float64)
    out = np.clip(_fz_cdf_interp()(np.clip(t, -_PHI_DOMAIN, _PHI_DOMAIN)), 0.0, None)
    total = _fz_cdf_interp()(_PHI_DOMAIN)
    out = np.where(t > _PHI_DOMAIN, total, out)
    return np.minimum(out, 1.0)


# ----------------------------------------------------------------------------
# psi and the two-sided laws
# ----------------------------------------------------------------------------

@lru_cache(maxsize=1)
def _g0_interp():
    """Chebyshev model of x -> g(0, -x) = tilted_g(0, 4^{1/3} x), x in
    [0, 10.5]; feeds psi, the two-sided joint law and the max marginal.

    At s = 0 the u,y integrand does not depend on x (only the upper y
    limit does), so all Chebyshev nodes share one weight grid: prefix
    integrals over whole y panels plus one batched partial panel per node.
    """
    U = 16.0
    x15, w15 = np.polynomial.legendre.leggauss(15)
    n_pan = int(math.ceil(2.0 * U / 1.0))
    edges = np.linspace(-U, U, n_pan + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    u_pts = (0.5 * (lo + hi) + 0.5 * (hi - lo) * x15[None, :]).ravel()
    u_wts = (0.5 * (hi - lo) * np.broadcast_to(w15, (n_pan, 15))).ravel()
    zu = 1j * u_pts
    base = airy.log_ai_many(zu)
    yg, wg = np.polynomial.legendre.leggauss(32)

    def inner_blocks(y_lo: np.ndarray, y_hi: np.ndarray) -> np.ndarray:
        # int_{y_lo_j}^{y_hi_j} Ai(iu+y)/Ai(iu)^2 dy, batched over blocks j
        mid = 0.5 * (y_lo + y_hi)[:, None]
        half = 0.5 * (y_hi - y_lo)[:, None]
        yy = mid + half * yg[None, :]                      # (nblk, 32)
        ld = airy.log_ai_diff(zu[:, None, None], yy[None, :, :])
        vals = np.exp(ld - base[:, None, None])            # (nu, nblk, 32)
        return np.einsum("ubk,bk->bu", vals, half * wg[None, :])

    a_max = FOUR13 * 10.5
    n_y = int(math.ceil(a_max))
    blocks = inner_blocks(np.arange(n_y, dtype=float),
                          np.arange(1, n_y + 1, dtype=float))
    prefix = np.concatenate([np.zeros((1, u_pts.size), dtype=np.complex128),
                             np.cumsum(blocks, axis=0)])

    def g0_vec(xarr):
        A = FOUR13 * np.asarray(xarr, dtype=np.float64)
        k = np.minimum(A.astype(int), n_y)
        inner = prefix[k]
        part = A > k
        if part.any():
            inner = inner.copy()
            inner[part] += inner_blocks(k[part].astype(float), A[part])
        return (inner @ u_wts).real / (2.0 * math.pi)

    return np.polynomial.chebyshev.Chebyshev.interpolate(
        g0_vec, 72, domain=[0.0, 10.5])


def _g0_fast(xarr) -> np.ndarray:
    return np.clip(_g0_interp()(np.asarray(xarr, dtype=np.float64)), 0.0, 1.0)


def psi(t: float, spec: QuadratureSpec | None = None) -> float:
    """psi(t) = int_0^inf h_{-x}(t) g(0, -x) dx  (t >= 0).

    At t = 0 the defining integrand degenerates (h concentrates at the
    barrier); the continuity limit is taken by evaluating at t = 1e-8 with
    the integral rescaled to the Gaussian width sqrt(2t).
    """
    if t < 0.0:
        raise ValueError("psi requires t >= 0")
    spec = spec or QuadratureSpec(abs_tol=1e-9, rel_tol=1e-8)
    t_eff = max(float(t), 1e-8)
    if t_eff < 0.02:
        w = math.sqrt(2.0 * t_eff)

        def f(warr):
            xs = w * warr
            return w * _h_over_shifts(FOUR13 * xs, t_eff) * _g0_fast(xs)

        res = integrate_interval(f, 0.0, 14.0, spec)
        return float(res.value.real)

    cap = 8.0 if t_eff <= 1.5 else 10.0

    def f(xarr):
        return _h_over_shifts(FOUR13 * xarr, t_eff) * _g0_fast(xarr)

    res = integrate_interval(f, 0.0, cap, spec)
    return float(res.value.real)


def joint_density_one_sided(t: float, a: float, state: StartState) -> float:
    """Joint density of (argmax time, max) for the one-sided process from
    (s, x), at max location t > s and max level a > x.

    Product form: exp((2/3)s^3 + 2s(x-a)) h_{x-a}(t-s) phi(t); the barrier
    factor k(t,0) = exp((2/3)t^3) phi(t) cancels the passage tilt in t.
    """
    s, x = state.s, state.x
    if not (t > s and a > x):
        raise ValueError("requires t > s and a > x")
    pref = math.exp((2.0 / 3.0) * s ** 3 + 2.0 * s * (x - a))
    hval = float(_h_shift(FOUR13 * (a - x), np.asarray([t - s]))[0])
    pt = _phi_fast([t])[0] if abs(t) <= _PHI_DOMAIN else phi(t)
    return pref * hval * pt


def max_density_one_sided(a: float, state: StartState,
                          spec: QuadratureSpec | None = None,
                          step: float = 1e-4) -> float:
    """Density of the maximum at level a under (s, x): the barrier
    derivative k(s, x-a), by Richardson-refined central differences of the
    hitting probability."""
    x0 = state.x - a
    if a <= state.x:
        raise ValueError("requires a > x")
    if x0 + step >= 0.0:
        raise StepDegeneracyError(
            "stencil would cross the barrier: x - a + h = %.3e" % (x0 + step))
    # near the barrier the passage spike carries ~1e-11 relative inversion
    # noise; tighter tolerances than this are unreachable there
    spec = spec or QuadratureSpec(abs_tol=1e-11, rel_tol=1e-10)

    def p_at(xx):
        return hitting_prob(StartState(state.s, xx), spec)

    d_h = (p_at(x0 + step) - p_at(x0 - step)) / (2.0 * step)
    d_h2 = (p_at(x0 + step / 2.0) - p_at(x0 - step / 2.0)) / step
    return max((4.0 * d_h2 - d_h) / 3.0, 0.0)


def joint_density_two_sided(t: float, a: float) -> float:
    """Joint density of (argmax location, max) of the two-sided process:
    h_{-a}(|t|) g(0,-a) phi(|t|), a > 0, even in t."""
    if not a > 0.0:
        raise ValueError("requires a > 0")
    at = abs(t)
    hval = float(_h_shift(FOUR13 * a, np.asarray([at]))[0])
    pt = _phi_fast([at])[0] if at <= _PHI_DOMAIN else phi(at)
    return hval * float(_g0_fast([a])[0]) * pt


_MAX_T_CAP = 14.0


@lru_cache(maxsize=4)
def _hphi_grid(n_per_unit: int = 12):
    """Fixed Gauss-Legendre grid over t in (0, 14] with phi values, for the
    inner time integral of the two-sided max marginal."""
    pts, wts = gauss_legendre_panels(0.0, _MAX_T_CAP, nodes_per_unit=n_per_unit)
    pvals = np.where(np.abs(pts) <= _PHI_DOMAIN, _phi_fast(np.minimum(pts, _PHI_DOMAIN)),
                     np.array([phi(float(tt)) if tt > _PHI_DOMAIN else 0.0
                               for tt in pts]))
    return pts, wts, pvals


def _max_marginal_quadrature(a_arr: np.ndarray) -> np.ndarray:
    """Two-sided max marginal f_M(a) = 2 g(0,-a) int_0^inf h_{-a}(t) phi(t) dt.

    Direct quadrature of the joint law over the argmax time; the t grid
    under-resolves the O(a^2) passage boundary layer below a ~ 0.1, so this
    is the cross-check route, not the primary one.
    """
    a_arr = np.atleast_1d(np.asarray(a_arr, dtype=np.float64))
    pts, wts, pvals = _hphi_grid()
    small = pts < _RESIDUE_T_MIN
    inner = np.zeros(a_arr.shape)
    zeros, aip = _residue_data()
    args = (zeros[None, :] + FOUR13 * a_arr[:, None]).astype(np.complex128)
    num = airy.airy_many(args.ravel())[0].real.reshape(args.shape)
    coef = TWO13 * num / aip[None, :]
    eig = np.exp(TWO13 * np.outer(zeros, pts[~small]))
    inner += (coef @ eig) @ (wts[~small] * pvals[~small])
    for tt, ww, pv in zip(pts[small], wts[small], pvals[small]):
        inner += ww * pv * _h_over_shifts(FOUR13 * a_arr, float(tt))
    return 2.0 * _g0_fast(a_arr) * inner


def _max_marginal_many(a_arr: np.ndarray) -> np.ndarray:
    """Primary route for the two-sided max marginal.

    The two halves of the path are independent, so the max CDF factorizes:
    F_M(a) = g(0,-a)^2, hence f_M(a) = 2 g(0,-a) d/da g(0,-a), evaluated by
    differentiating the Chebyshev survival model.
    """
    a_arr = np.atleast_1d(np.asarray(a_arr, dtype=np.float64))
    g0 = _g0_interp()
    return np.clip(2.0 * np.clip(g0(a_arr), 0.0, 1.0) * g0.deriv()(a_arr), 0.0, None)


def max_marginal_two_sided(a: float) -> float:
    """Density of the overall maximum of the two-sided process at a > 0."""
    if not a > 0.0:
        raise ValueError("requires a > 0")
    return float(_max_marginal_many(np.asarray([a]))[0])


def bm_first_passage_density(z: float, u: float) -> float:
    """First-passage density of driftless Brownian motion from z > 0 to 0:
    (2 pi u^3)^{-1/2} z exp(-z^2/(2u))."""
    if not (z > 0.0 and u > 0.0):
        raise ValueError("requires z > 0 and u > 0")
    return z * math.exp(-z * z / (2.0 * u)) / math.sqrt(2.0 * math.pi * u ** 3)


def bm_first_passage_cdf(z: float, u) -> np.ndarray:
    """P(tau_0 <= u) = erfc(z / sqrt(2u)) for driftless BM from z > 0."""
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    out = np.zeros(u.shape)
    pos = u > 0
    out[pos] = erfc(z / np.sqrt(2.0 * u[pos]))
    return out


# ----------------------------------------------------------------------------
# Moments of the two-sided laws
# ----------------------------------------------------------------------------

def argmax_second_moment(spec: QuadratureSpec | None = None) -> float:
    """E tau_M^2 under the two-sided law, by quadrature of t^2 f_Z(t)."""
    spec = spec or QuadratureSpec(abs_tol=1e-11, rel_tol=1e-9)
    res = integrate_interval(lambda t: t * t * _fz_fast(t), -4.0, 4.0, spec)
    return float(res.value.real)


def max_mean_two_sided(spec: QuadratureSpec | None = None) -> float:
    """E M under the two-sided law: int_0^inf (1 - F_M(a)) da with the exact
    factorization F_M(a) = g(0,-a)^2."""
    spec = spec or QuadratureSpec(abs_tol=1e-10, rel_tol=1e-9)
    g0 = _g0_interp()
    res = integrate_interval(
        lambda a: 1.0 - np.clip(g0(a), 0.0, 1.0) ** 2, 0.0, 10.0, spec)
    return float(res.value.real)


# ----------------------------------------------------------------------------
# Tabulation
# ----------------------------------------------------------------------------

_TABLE_KINDS = ("argmax", "max", "joint_marginal", "first_passage")


@dataclass
class DensityTable:
    """Grid + values + provenance for one tabulated density."""

    grid: np.ndarray
    values: np.ndarray
    kind: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.kind not in _TABLE_KINDS:
            raise ValueError("unknown table kind %r" % (self.kind,))
        if self.grid.ndim != 1 or self.grid.size < 2 or np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if self.grid.shape != self.values.shape:
            raise ValueError("grid/value shape mismatch")
        ok = ~np.isnan(self.values)
        if np.any(self.values[ok] < -1e-9):
            raise ValueError("negative density values")
        self.values[ok & (self.values < 0.0)] = 0.0

    def trapezoid_mass(self) -> float:
        ok = ~np.isnan(self.values)
        return float(np.trapezoid(self.values[ok], self.grid[ok]))

    def to_csv(self, header: str = "t,f") -> str:
        lines = [header]
        for g, v in zip(self.grid, self.values):
            lines.append("%.17g,%.17g" % (g, v))
        return "\n".join(lines) + "\n"


def tabulate(kind: str, grid, spec: QuadratureSpec | None = None,
             state: StartState | None = None) -> DensityTable:
    """Tabulate one of the densities on a strictly increasing grid.

    kinds: ``argmax`` (two-sided argmax density, mass target 1), ``max``
    (one-sided max density from ``state``), ``joint_marginal`` (two-sided
    max marginal), ``first_passage`` (passage-time density from ``state``,
    mass target = hitting probability).  Failed points are NaN and listed
    in ``meta['failed_points']``.
    """
    grid = np.asarray(grid, dtype=np.float64)
    spec = spec or QuadratureSpec()
    meta = {"abs_tol": spec.abs_tol, "rel_tol": spec.rel_tol,
            "mass_tol": 1e-5, "kind": kind, "failed_points": []}
    values = np.empty(grid.shape)

    if kind == "argmax":
        values = _fz_fast(grid)
        cdf = chernoff_cdf(np.asarray([grid[0], grid[-1]]))
        meta["mass_target"] = float(cdf[1] - cdf[0])
    elif kind == "joint_marginal":
        values = _max_marginal_many(grid)
        meta["mass_target"] = None
        if np.any(grid <= 0.0):
            raise ValueError("joint_marginal grid must be positive")
    elif kind == "first_passage":
        if state is None:
            raise ValueError("first_passage needs a start state")
        s, x = state.s, state.x
        meta["state"] = (s, x)
        tau = grid - s
        if np.any(tau <= 0.0):
            raise ValueError("first_passage grid must lie above the start time")
        values = np.exp(2.0 * s * x - _cubic_gap(s, tau)) * _h_shift(state.shift, tau)
        meta["mass_target"] = hitting_prob(state)
        meta["mass_tol"] = 1e-4
    elif kind == "max":
        if state is None:
            raise ValueError("max needs a start state")
        meta["state"] = (state.s, state.x)
        meta["mass_target"] = None
        for i, aa in enumerate(grid):
            try:
                values[i] = max_density_one_sided(float(aa), state)
            except (StepDegeneracyError, ProbabilityRangeError):
                values[i] = np.nan
                meta["failed_points"].append(i)
    else:
        raise ValueError("unknown table kind %r" % (kind,))

    table = DensityTable(grid, values, kind, meta)
    target = meta.get("mass_target")
    meta["mass"] = table.trapezoid_mass()
    if target is not None and kind == "argmax":
        step = float(np.max(np.diff(grid)))
        # trapezoid discretization allowance on coarse grids
        allowance = meta["mass_tol"] + step * step / 6.0
        if abs(meta["mass"] - target) > allowance:
            raise ArithmeticError(
                "tabulated mass %.8f misses target %.8f" % (meta["mass"], target))
    return table
