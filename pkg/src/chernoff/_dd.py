"""Vectorized double-double (roughly 31-digit) arithmetic on numpy arrays.

Only the handful of operations needed by the Airy Maclaurin series are
implemented.  A double-double value is a pair of float64 arrays (hi, lo)
with hi + lo representing the value and |lo| <= ulp(hi)/2.  Complex
double-doubles are 4-tuples (re_hi, re_lo, im_hi, im_lo).

All routines are branch-free and preserve numpy broadcasting, so the Airy
series can run over whole quadrature batches at once.
"""

from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1, Dekker split constant


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _quick_two_sum(a, b):
    # requires |a| >= |b| componentwise
    s = a + b
    err = b - (s - a)
    return s, err


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    lo = a - hi
    return hi, lo


def _two_prod(a, b):
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


def add(xh, xl, yh, yl):
    s, e = _two_sum(xh, yh)
    e = e + xl + yl
    return _quick_two_sum(s, e)


def mul(xh, xl, yh, yl):
    p, e = _two_prod(xh, yh)
    e = e + xh * yl + xl * yh
    return _quick_two_sum(p, e)


def div_scalar(xh, xl, d: float):
    # d is an exactly representable float (integer-valued divisors here)
    q1 = xh / d
    p, e = _two_prod(q1, d)
    r = ((xh - p) - e + xl) / d
    return _quick_two_sum(q1, r)


def cadd(x, y):
    rh, rl = add(x[0], x[1], y[0], y[1])
    ih, il = add(x[2], x[3], y[2], y[3])
    return rh, rl, ih, il


def cmul(x, y):
    ac_h, ac_l = mul(x[0], x[1], y[0], y[1])
    bd_h, bd_l = mul(x[2], x[3], y[2], y[3])
    ad_h, ad_l = mul(x[0], x[1], y[2], y[3])
    bc_h, bc_l = mul(x[2], x[3], y[0], y[1])
    rh, rl = add(ac_h, ac_l, -bd_h, -bd_l)
    ih, il = add(ad_h, ad_l, bc_h, bc_l)
    return rh, rl, ih, il


def cdiv_scalar(x, d: float):
    rh, rl = div_scalar(x[0], x[1], d)
    ih, il = div_scalar(x[2], x[3], d)
    return rh, rl, ih, il


def cmul_real_dd(x, ch: float, cl: float):
    """Multiply complex-dd x by the real double-double constant (ch, cl)."""
    rh, rl = mul(x[0], x[1], ch, cl)
    ih, il = mul(x[2], x[3], ch, cl)
    return rh, rl, ih, il


def cfrom_complex(z: np.ndarray):
    z = np.asarray(z, dtype=np.complex128)
    zero = np.zeros(z.shape)
    return z.real.copy(), zero.copy(), z.imag.copy(), zero.copy()


def cto_complex(x) -> np.ndarray:
    return (x[0] + x[1]) + 1j * (x[2] + x[3])
