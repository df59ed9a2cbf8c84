"""Two-parameter Mittag-Leffler function E_{a,b}(z) for real arguments.

Strategy: the defining Taylor series, summed in arbitrary precision with
the working precision sized from the series' internal cancellation
(the largest term grows like exp(a*|z|**(1/a)) while the value may stay
algebraic).  Where that precision requirement explodes (small a, large
negative z) the algebraic asymptotic expansion -sum_k z^{-k}/Gamma(b-ak)
takes over; on the negative axis with 0 < a < 1 its exponential
correction terms vanish identically.  Arguments where neither route
certifies the target accuracy, or where the value overflows double
precision, are rejected rather than silently mis-evaluated.

A fast extended-precision path covers a = 1 with modest cancellation,
the case the boundary-memory terms hit once per time level.
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
from scipy.special import rgamma

_LD = np.longdouble

_Z_MAX = 100.0
_DIGITS_MAX = 350.0
_FAST_DIGITS = 5.0


def _series_digits(alpha: float, absz: float) -> float:
    """Decimal digits lost to cancellation in the Taylor series.

    The largest term is ~ e^{|z|^{1/alpha}} (Laplace analysis of
    |z|^k / Gamma(alpha k + beta)) while the value may stay order one.
    """
    if absz == 0.0:
        return 0.0
    return 0.434 * absz ** (1.0 / alpha)


def _series_fast(alpha: float, beta: float, z: float) -> float:
    # alpha = 1 only: term ratio is z/(k + beta), an exact recurrence
    t = _LD(1.0) / _LD(math.gamma(beta))
    acc = t
    zl = _LD(z)
    for k in range(1, 400):
        t = t * zl / (_LD(k) + _LD(beta) - 1.0)
        acc += t
        if abs(t) < 1e-25 * abs(acc) + _LD(1e-320):
            return float(acc)
    raise RuntimeError("fast series failed to converge")


def _series_mp(alpha: float, beta: float, z: float, digits: float) -> float:
    with mp.workdps(int(35 + digits)):
        a = mp.mpf(float(alpha))
        b = mp.mpf(float(beta))
        x = mp.mpf(float(z))
        acc = mp.mpf(0)
        term_scale = mp.mpf(10) ** (-(mp.mp.dps + 5))
        powz = mp.mpf(1)
        for k in range(0, 500_000):
            term = powz / mp.gamma(a * k + b)
            acc += term
            if abs(term) < term_scale * (abs(acc) + 1):
                # require a few consecutive negligible terms: the series
                # magnitude can dip before the gamma growth takes over
                if k > 2 * (abs(x) ** (1.0 / alpha)) / max(alpha, 0.05) + 20:
                    break
            powz *= x
        return float(acc)


def _asymptotic_negative(alpha: float, beta: float, z: float) -> float:
    # valid for z -> -inf with 0 < alpha < 1: purely algebraic expansion
    # this branch is only reached when |z|**(1/alpha) is large, so the
    # optimal truncation point k ~ |z|**(1/alpha) / alpha lies far beyond
    # the 400 terms summed here and the expansion cannot diverge first.
    # |term| is not monotone (rgamma oscillates through zeros on the
    # negative axis), so convergence is judged on a 3-term tail window.
    x = -z
    acc = 0.0
    zk = 1.0
    tail = [math.inf] * 3
    for k in range(1, 400):
        zk /= -x  # z^{-k} with z = -x
        term = -zk * float(rgamma(beta - alpha * k))
        acc += term
        tail[k % 3] = abs(term)
        if max(tail) <= 1e-15 * max(abs(acc), 1e-300):
            return acc
    if max(tail) <= 1e-12 * max(abs(acc), 1e-300):
        return acc
    raise ValueError(
        "Mittag-Leffler arguments outside the validated envelope "
        f"(asymptotic tail not below tolerance for alpha={alpha}, beta={beta}, z={z})"
    )


def ml2(alpha: float, beta: float, z: float) -> float:
    """E_{alpha,beta}(z) for real z, relative accuracy ~1e-13 on the envelope.

    Envelope: alpha, beta > 0 and |z| <= 100, excluding arguments whose
    value overflows double precision (large positive z with small alpha);
    those raise ValueError.
    """
    if not (alpha > 0.0 and beta > 0.0):
        raise ValueError("alpha and beta must be positive")
    if not math.isfinite(z) or abs(z) > _Z_MAX:
        raise ValueError(f"|z| <= {_Z_MAX} required, got {z}")
    if z == 0.0:
        return 1.0 / math.gamma(beta)
    digits = _series_digits(alpha, abs(z))
    if digits <= _DIGITS_MAX:
        if z > 0.0 and abs(z) ** (1.0 / alpha) > 700.0:
            raise ValueError("Mittag-Leffler value overflows double precision")
        if alpha == 1.0 and digits <= _FAST_DIGITS:
            return _series_fast(alpha, beta, z)
        return _series_mp(alpha, beta, z, digits)
    if z < 0.0 and alpha < 1.0:
        return _asymptotic_negative(alpha, beta, z)
    raise ValueError(
        "Mittag-Leffler arguments outside the validated envelope "
        f"(alpha={alpha}, beta={beta}, z={z})"
    )
