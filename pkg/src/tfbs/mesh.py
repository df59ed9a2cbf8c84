"""Graded temporal meshes and uniform spatial grids.

The time mesh tau_n = T*(n/M)**gamma concentrates levels near tau = 0 to
compensate the tau**(alpha-1) blow-up of the solution's time derivative.
The companion-resolution formulas couple N and M in convergence studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp
import numpy as np


@dataclass(frozen=True)
class GradedMesh:
    """Nonuniform time levels tau_n = T*(n/M)**gamma."""

    T: float
    M: int
    gamma: float
    levels: np.ndarray
    steps: np.ndarray

    @property
    def first_step(self) -> float:
        """delta = tau_1 = T*M**(-gamma), the SOE cut-off time."""
        return float(self.steps[0])


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid of N+1 nodes on [x_l, x_r]."""

    x_l: float
    x_r: float
    N: int
    h: float
    nodes: np.ndarray


def build_graded_mesh(T: float, M: int, gamma: float) -> GradedMesh:
    """Build the graded mesh with exact endpoints tau_0 = 0, tau_M = T."""
    if not (math.isfinite(T) and T > 0.0):
        raise ValueError("T must be finite and positive")
    if M < 1:
        raise ValueError("M must be a positive integer")
    if not (math.isfinite(gamma) and gamma >= 1.0):
        raise ValueError("gamma must be finite and >= 1")

    n = np.arange(M + 1, dtype=float)
    levels = T * (n / M) ** gamma
    # endpoint computed directly, not via the power formula
    levels[0] = 0.0
    levels[M] = T
    steps = np.diff(levels)
    if np.any(steps <= 0.0):
        raise ValueError("mesh levels must be strictly increasing")
    levels.setflags(write=False)
    steps.setflags(write=False)
    return GradedMesh(T=float(T), M=int(M), gamma=float(gamma), levels=levels, steps=steps)


def build_spatial_grid(x_l: float, x_r: float, N: int) -> SpatialGrid:
    """Build a uniform spatial grid with exact endpoints."""
    if not (math.isfinite(x_l) and math.isfinite(x_r)) or x_r <= x_l:
        raise ValueError("require finite x_l < x_r")
    if N < 2:
        raise ValueError("N must be >= 2")
    h = (x_r - x_l) / N
    nodes = x_l + h * np.arange(N + 1, dtype=float)
    nodes[0] = x_l
    nodes[N] = x_r
    nodes.setflags(write=False)
    return SpatialGrid(x_l=float(x_l), x_r=float(x_r), N=int(N), h=float(h), nodes=nodes)


def _ceil_root(t: int, q: int) -> int:
    """Smallest integer k with k**q >= t, i.e. ceil(t**(1/q)), exactly."""
    if q == 1 or t <= 1:
        return t
    if t < 10**300:
        k = max(1, int(round(t ** (1.0 / q))))
    else:
        with mp.workdps(40):
            k = max(1, int(mp.mpf(t) ** (mp.mpf(1) / q)))
    while k**q < t:
        k += 1
    while k > 1 and (k - 1) ** q >= t:
        k -= 1
    return k


def _ceil_power(base: int, exponent: float) -> int:
    """ceil(base**exponent) with exact integer arithmetic where possible.

    Exponents that are (to relative 1e-12) small-denominator rationals p/q
    are evaluated as ceil((base**p)**(1/q)) over big integers, so exact
    cases like 8**(10/3) = 1024 are never bumped to 1025 by round-off.
    Other exponents get a plain extended-precision ceil.
    """
    frac = Fraction(exponent).limit_denominator(64)
    if frac > 0 and abs(float(frac) - exponent) <= 1e-12 * abs(exponent):
        return _ceil_root(base ** frac.numerator, frac.denominator)
    with mp.workdps(60):
        return int(mp.ceil(mp.power(mp.mpf(base), mp.mpf(exponent))))


def coupled_resolution(fixed: int, alpha: float, gamma: float, mode: str) -> tuple[int, int]:
    """Companion resolution for convergence studies.

    Spatial mode: given N, return (N, M) with M = ceil(N**(4/r)).
    Temporal mode: given M, return (N, M) with N = ceil(M**(r/4)).
    Here r = min(gamma*alpha, 2 - alpha) is the attainable temporal order.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    if gamma < 1.0:
        raise ValueError("gamma must be >= 1")
    if fixed < 1:
        raise ValueError("fixed resolution must be positive")
    r = min(gamma * alpha, 2.0 - alpha)
    if mode == "spatial":
        return int(fixed), _ceil_power(int(fixed), 4.0 / r)
    if mode == "temporal":
        return _ceil_power(int(fixed), r / 4.0), int(fixed)
    raise ValueError("mode must be 'spatial' or 'temporal'")
